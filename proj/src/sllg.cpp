#include "pisd/sllg.hpp"

#include <cmath>
#include <sstream>

namespace pisd {

NoiseSettings NoiseSettings::for_spec(const SpinSystemSpec& spec, double temperature,
                                      std::uint64_t seed, std::uint32_t realization) {
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw std::invalid_argument("noise: temperature must be finite and >= 0");
  }
  NoiseSettings n;
  n.alpha = spec.alpha;
  n.temperature = temperature;
  n.mu_s = spec.mu_s();
  n.gamma = spec.constants.gyromagnetic_ratio();
  n.k_B = spec.constants.k_B;
  n.seed = seed;
  n.realization = realization;
  return n;
}

double NoiseSettings::variance(double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("noise: dt must be > 0");
  if (temperature == 0.0 || alpha == 0.0) return 0.0;
  return 2.0 * alpha * k_B * temperature / (mu_s * gamma * dt);
}

std::array<Vec3, 2> noise_fields(const NoiseSettings& noise, std::uint64_t step_index, double dt) {
  const double sigma = noise.sigma(dt);
  if (sigma == 0.0) return {Vec3::Zero(), Vec3::Zero()};
  const CounterNormal rng(noise.seed, noise.realization);
  const auto g0 = rng.pair(step_index, 0);
  const auto g1 = rng.pair(step_index, 1);
  const auto g2 = rng.pair(step_index, 2);
  return {Vec3(g0[0], g0[1], g1[0]) * sigma, Vec3(g1[1], g2[0], g2[1]) * sigma};
}

Vec3 llg_drift(const Vec3& n, const Vec3& b, double alpha, double gamma) {
  const Vec3 nxb = n.cross(b);
  return (-gamma / (1.0 + alpha * alpha)) * (nxb + alpha * n.cross(nxb));
}

EvaluatedConfiguration evaluate(const EffectiveFieldModel& model, const CoherentConfiguration& c) {
  try {
    return {c, model.effective_field(c)};
  } catch (const SimulationDomainError&) {
    throw;
  } catch (const DomainError& e) {
    std::ostringstream os;
    os.precision(10);
    os << e.what() << " at T=" << model.temperature() << " K, n1=(" << c.n1.x() << ", " << c.n1.y()
       << ", " << c.n1.z() << "), n2=(" << c.n2.x() << ", " << c.n2.y() << ", " << c.n2.z() << ")";
    throw SimulationDomainError(os.str(), model.temperature(), c);
  }
}

SimState Integrator::step(const SimState& state, const EffectiveFieldModel& model, const NoiseSettings& noise,
                          double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  SimState out;
  out.config = advance(evaluate(model, state.config), model, noise_fields(noise, state.step_index, dt), noise.alpha,
                       noise.gamma, dt)
                   .config;
  out.time = state.time + dt;
  out.step_index = state.step_index + 1;
  return out;
}

EvaluatedConfiguration HeunIntegrator::advance(const EvaluatedConfiguration& start, const EffectiveFieldModel& model,
                                               const std::array<Vec3, 2>& eta, double alpha, double gamma,
                                               double dt) const {
  const Vec3& n1 = start.config.n1.vec();
  const Vec3& n2 = start.config.n2.vec();

  const Vec3 d1 = llg_drift(n1, start.field.b1 + eta[0], alpha, gamma);
  const Vec3 d2 = llg_drift(n2, start.field.b2 + eta[1], alpha, gamma);
  const EvaluatedConfiguration pred = evaluate(
      model, {BlochVector::normalized(n1 + dt * d1), BlochVector::normalized(n2 + dt * d2)});

  const Vec3 e1 = llg_drift(pred.config.n1.vec(), pred.field.b1 + eta[0], alpha, gamma);
  const Vec3 e2 = llg_drift(pred.config.n2.vec(), pred.field.b2 + eta[1], alpha, gamma);
  return evaluate(model, {BlochVector::normalized(n1 + 0.5 * dt * (d1 + e1)),
                          BlochVector::normalized(n2 + 0.5 * dt * (d2 + e2))});
}

namespace {

struct Subdivider {
  const Integrator& integrator;
  const EffectiveFieldModel& model;
  const NoiseSettings& noise;
  CounterNormal rng;
  std::uint64_t step_index;
  // Wiener increment variance per unit time, so that W = eta * dt ~ N(0, q dt).
  double q;

  // Advances `config` over an interval of length dt carrying noise eta; on
  // failure splits the interval. Nodes are numbered heap-style from the root
  // interval 1 to address the bridge deviates.
  bool run(EvaluatedConfiguration& config, const std::array<Vec3, 2>& eta, double dt, int depth,
           std::uint32_t node) const {
    try {
      config = integrator.advance(config, model, eta, noise.alpha, noise.gamma, dt);
      return true;
    } catch (const SimulationDomainError&) {
      return depth < kMaxSubdivision && split(config, eta, dt, depth, node);
    }
  }

  bool split(EvaluatedConfiguration& config, const std::array<Vec3, 2>& eta, double dt, int depth,
             std::uint32_t node) const {
    // W1 | W ~ N(W/2, q dt / 4)
    const std::uint32_t block = 8 + 4 * node;
    const auto g0 = rng.pair(step_index, block);
    const auto g1 = rng.pair(step_index, block + 1);
    const auto g2 = rng.pair(step_index, block + 2);
    const double spread = 0.5 * std::sqrt(q * dt);
    const std::array<Vec3, 2> xi{Vec3(g0[0], g0[1], g1[0]), Vec3(g1[1], g2[0], g2[1])};
    const double half = 0.5 * dt;
    std::array<Vec3, 2> first;
    std::array<Vec3, 2> second;
    for (int i = 0; i < 2; ++i) {
      const Vec3 w = eta[i] * dt;
      const Vec3 w1 = 0.5 * w + spread * xi[i];
      first[i] = w1 / half;
      second[i] = (w - w1) / half;
    }
    EvaluatedConfiguration trial = config;
    if (!run(trial, first, half, depth + 1, 2 * node)) return false;
    if (!run(trial, second, half, depth + 1, 2 * node + 1)) return false;
    config = trial;
    return true;
  }
};

}  // namespace

SimulationStats simulate(SimState& state, const EffectiveFieldModel& model, const NoiseSettings& noise,
                         double dt, double t_total, const StepObserver& observer, DomainPolicy policy,
                         const Integrator& integrator) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (!(t_total >= 0.0)) throw std::invalid_argument("simulate: t_total must be >= 0");
  const auto n_steps = static_cast<std::uint64_t>(std::llround(t_total / dt));
  const double q = noise.variance(dt) * dt;
  SimulationStats stats;
  if (n_steps == 0) return stats;
  EvaluatedConfiguration current = evaluate(model, state.config);
  for (std::uint64_t i = 0; i < n_steps; ++i) {
    const auto eta = noise_fields(noise, state.step_index, dt);
    try {
      current = integrator.advance(current, model, eta, noise.alpha, noise.gamma, dt);
    } catch (const SimulationDomainError&) {
      if (policy == DomainPolicy::Propagate) throw;
      bool ok = false;
      if (policy == DomainPolicy::Subdivide) {
        ++stats.subdivided;
        const Subdivider sub{integrator, model, noise, CounterNormal(noise.seed, noise.realization),
                             state.step_index, q};
        EvaluatedConfiguration trial = current;
        ok = sub.split(trial, eta, dt, 0, 1);
        if (ok) current = trial;
      }
      if (!ok) ++stats.rejected;
    }
    state.config = current.config;
    state.time += dt;
    ++state.step_index;
    ++stats.steps;
    if (observer) observer(state);
  }
  return stats;
}

}  // namespace pisd
