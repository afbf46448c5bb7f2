#include "pisd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace pisd {

ThermalAverage thermal_average(std::span<const std::vector<double>> realizations,
                               const SpinSystemSpec& spec, bool quantum) {
  if (realizations.empty()) throw std::invalid_argument("thermal_average: no realizations");
  std::vector<double> means;
  std::size_t total = 0;
  for (const auto& r : realizations) {
    if (r.empty()) throw std::invalid_argument("thermal_average: realization without samples");
    double sum = 0.0;
    for (double v : r) sum += v;
    means.push_back(sum / static_cast<double>(r.size()));
    total += r.size();
  }

  auto mean_and_se = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    if (xs.size() < 2) return std::pair{m, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double n = static_cast<double>(xs.size());
    return std::pair{m, std::sqrt(ss / (n - 1.0) / n)};
  };

  double mean = 0.0;
  double se = 0.0;
  if (means.size() >= 2) {
    std::tie(mean, se) = mean_and_se(means);
  } else {
    const auto& r = realizations.front();
    const std::size_t n_batches = std::min<std::size_t>(10, r.size());
    std::vector<double> batches;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t lo = b * r.size() / n_batches;
      const std::size_t hi = (b + 1) * r.size() / n_batches;
      double sum = 0.0;
      for (std::size_t i = lo; i < hi; ++i) sum += r[i];
      batches.push_back(sum / static_cast<double>(hi - lo));
    }
    se = mean_and_se(batches).second;
    mean = means.front();
  }
  const double c = quantum ? spec.s.value() + 1.0 : spec.s.value();
  return {c * mean, c * se, total};
}

void SweepConfig::validate() const {
  spec.validate();
  validate_variant(variant);
  if (temperatures.empty()) throw std::invalid_argument("sweep: no temperatures");
  for (double t : temperatures) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("sweep: temperatures must be > 0");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("sweep: dt must be > 0");
  if (!(t_equil > 0.0)) throw std::invalid_argument("sweep: t_equil must be > 0");
  if (!(t_average > 0.0)) throw std::invalid_argument("sweep: t_average must be > 0");
  if (n_realizations < 1) throw std::invalid_argument("sweep: n_realizations must be >= 1");
  if (sample_stride < 1) throw std::invalid_argument("sweep: sample_stride must be >= 1");
  if (t_average / dt < sample_stride) {
    throw std::invalid_argument("sweep: averaging window shorter than one sample stride");
  }
  if (!(max_rejected_fraction >= 0.0)) {
    throw std::invalid_argument("sweep: max_rejected_fraction must be >= 0");
  }
}

bool SweepResult::all_failed() const {
  return std::none_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stream key for one temperature: depends on the value, not its position in
// the list, so a row can be regenerated by a one-temperature sweep.
std::uint64_t row_seed(std::uint64_t seed, double temperature) {
  return splitmix64(seed ^ splitmix64(std::bit_cast<std::uint64_t>(temperature)));
}

constexpr std::uint64_t kInitialConfigStep = std::uint64_t{1} << 62;

BlochVector uniform_on_sphere(double u_cos, double u_phi) {
  const double z = 2.0 * u_cos - 1.0;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * std::numbers::pi * u_phi;
  return BlochVector::normalized(Vec3(r * std::cos(phi), r * std::sin(phi), z));
}

struct TaskResult {
  std::vector<double> samples;
  SimulationStats stats;
  bool ok = true;
  std::string failure;
  double wall_time_s = 0.0;
};

}  // namespace

CoherentConfiguration initial_configuration(const EffectiveFieldModel& model, std::uint64_t seed,
                                            std::uint32_t realization) {
  const CounterNormal rng(seed, realization);
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    const auto a = rng.uniform_pair(kInitialConfigStep + attempt, 16);
    const auto b = rng.uniform_pair(kInitialConfigStep + attempt, 17);
    const CoherentConfiguration c{uniform_on_sphere(a[0], a[1]), uniform_on_sphere(b[0], b[1])};
    try {
      model.effective_field(c);
      return c;
    } catch (const DomainError&) {
    }
  }
  std::ostringstream os;
  os << "no admissible initial configuration in 1000 draws at T=" << model.temperature() << " K";
  throw DomainError(os.str());
}

SweepResult run_temperature_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<double> temps = cfg.temperatures;
  std::sort(temps.begin(), temps.end());

  std::shared_ptr<const EigenSystem> eig;
  if (cfg.variant.kind == ModelKind::EigenOverlap) {
    eig = std::make_shared<const EigenSystem>(eigendecompose(build_two_spin_hamiltonian(cfg.spec)));
  }
  std::vector<std::unique_ptr<EffectiveFieldModel>> models;
  for (double t : temps) models.push_back(std::make_unique<EffectiveFieldModel>(cfg.variant, cfg.spec, t, eig));

  const std::size_t n_real = static_cast<std::size_t>(cfg.n_realizations);
  const std::size_t n_tasks = temps.size() * n_real;
  std::vector<TaskResult> results(n_tasks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      const std::size_t ti = task / n_real;
      const auto r = static_cast<std::uint32_t>(task % n_real);
      const EffectiveFieldModel& model = *models[ti];
      const std::uint64_t seed = row_seed(cfg.seed, temps[ti]);
      TaskResult& out = results[task];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const NoiseSettings noise = NoiseSettings::for_spec(cfg.spec, temps[ti], seed, r);
        SimState state{initial_configuration(model, seed, r), 0.0, 0};
        const auto eq = simulate(state, model, noise, cfg.dt, cfg.t_equil, {}, DomainPolicy::Subdivide);
        std::uint64_t k = 0;
        const auto stride = static_cast<std::uint64_t>(cfg.sample_stride);
        const auto av = simulate(
            state, model, noise, cfg.dt, cfg.t_average,
            [&](const SimState& s) {
              if (++k % stride == 0) out.samples.push_back(0.5 * (s.config.n1.z() + s.config.n2.z()));
            },
            DomainPolicy::Subdivide);
        out.stats = {eq.steps + av.steps, eq.rejected + av.rejected};
      } catch (const DomainError& e) {
        out.ok = false;
        out.failure = e.what();
      }
      out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  unsigned n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_tasks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  SweepResult result;
  for (std::size_t ti = 0; ti < temps.size(); ++ti) {
    SweepRow row;
    row.temperature = temps[ti];
    row.variant = cfg.variant;
    row.seed = cfg.seed;
    std::vector<std::vector<double>> samples;
    for (std::size_t r = 0; r < n_real; ++r) {
      TaskResult& t = results[ti * n_real + r];
      row.wall_time_s += t.wall_time_s;
      row.steps += t.stats.steps;
      row.rejected_steps += t.stats.rejected;
      if (!t.ok && row.ok) {
        row.ok = false;
        row.failure = "realization " + std::to_string(r) + ": " + t.failure;
      }
      samples.push_back(std::move(t.samples));
    }
    if (row.ok && row.steps > 0 &&
        static_cast<double>(row.rejected_steps) > cfg.max_rejected_fraction * static_cast<double>(row.steps)) {
      row.ok = false;
      std::ostringstream os;
      os << "model domain rejected " << row.rejected_steps << " of " << row.steps << " steps";
      row.failure = os.str();
    }
    if (row.ok) {
      const auto avg = thermal_average(samples, cfg.spec, cfg.variant.is_quantum());
      row.sz_over_hbar = avg.sz_over_hbar;
      row.std_error = avg.std_error;
      row.n_samples = avg.n_samples;
    } else {
      row.sz_over_hbar = std::numeric_limits<double>::quiet_NaN();
      row.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

namespace {

struct GaussRule {
  std::vector<double> x, w;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule gauss_legendre(int n) {
  GaussRule g{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.x[static_cast<std::size_t>(i)] = -x;
    g.x[static_cast<std::size_t>(n - 1 - i)] = x;
    g.w[static_cast<std::size_t>(i)] = w;
    g.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return g;
}

// Streaming log-sum-exp accumulator for weighted averages.
struct LogAccumulator {
  double shift = -std::numeric_limits<double>::infinity();
  double den = 0.0;
  double num = 0.0;
  void add(double log_weight, double value) {
    if (log_weight > shift) {
      const double scale = std::exp(shift - log_weight);
      den *= scale;
      num *= scale;
      shift = log_weight;
    }
    const double w = std::exp(log_weight - shift);
    den += w;
    num += w * value;
  }
  double mean() const { return num / den; }
};

double classical_grid(double k, double x, int n) {
  const GaussRule g = gauss_legendre(n);
  const int m = 2 * n;
  std::vector<double> cphi(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) cphi[static_cast<std::size_t>(j)] = std::cos(2.0 * std::numbers::pi * j / m);
  LogAccumulator acc;
  for (int a = 0; a < n; ++a) {
    const double u1 = g.x[static_cast<std::size_t>(a)];
    const double s1 = std::sqrt(1.0 - u1 * u1);
    for (int b = 0; b < n; ++b) {
      const double u2 = g.x[static_cast<std::size_t>(b)];
      const double s2 = std::sqrt(1.0 - u2 * u2);
      const double lw = std::log(g.w[static_cast<std::size_t>(a)] * g.w[static_cast<std::size_t>(b)]);
      const double value = 0.5 * (u1 + u2);
      for (int j = 0; j < m; ++j) {
        acc.add(lw + k * (s1 * s2 * cphi[static_cast<std::size_t>(j)] + u1 * u2) + x * (u1 + u2), value);
      }
    }
  }
  return acc.mean();
}

}  // namespace

double classical_reference_quadrature(const SpinSystemSpec& spec, double temperature) {
  spec.validate();
  if (!(temperature > 0.0)) throw std::invalid_argument("classical quadrature: T must be > 0");
  const double b_norm = spec.B.norm();
  if (b_norm == 0.0) return 0.0;
  const double beta = 1.0 / (spec.constants.k_B * temperature);
  const double s = spec.s.value();
  // Work in a frame with B along z, then project back.
  const double k = beta * spec.J * s * s;
  const double x = beta * spec.constants.g_mu_B() * s * b_norm;
  double prev = classical_grid(k, x, 16);
  for (int n = 32; n <= 512; n *= 2) {
    const double cur = classical_grid(k, x, n);
    if (std::abs(cur - prev) <= 1e-8 * std::abs(cur)) return cur * spec.B.z() / b_norm;
    prev = cur;
  }
  std::ostringstream os;
  os << "classical quadrature did not converge to 1e-8 at T=" << temperature << " K (last value " << prev << ")";
  throw QuadratureError(os.str());
}

double model_reference_sz(const EffectiveFieldModel& model, int n) {
  if (n < 2) throw std::invalid_argument("model_reference_sz: n must be >= 2");
  if (!model.spec().field_along_z()) throw std::invalid_argument("model_reference_sz: B must be along z");
  const GaussRule g = gauss_legendre(n);
  const int m = 2 * n;
  LogAccumulator acc;
  const double beta = model.beta();
  for (int a = 0; a < n; ++a) {
    const double u1 = g.x[static_cast<std::size_t>(a)];
    const BlochVector n1 = BlochVector::normalized(Vec3(std::sqrt(1.0 - u1 * u1), 0.0, u1));
    for (int b = 0; b < n; ++b) {
      const double u2 = g.x[static_cast<std::size_t>(b)];
      const double s2 = std::sqrt(1.0 - u2 * u2);
      const double lw = std::log(g.w[static_cast<std::size_t>(a)] * g.w[static_cast<std::size_t>(b)]);
      for (int j = 0; j < m; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / m;
        const CoherentConfiguration c{n1, BlochVector::normalized(Vec3(s2 * std::cos(phi), s2 * std::sin(phi), u2))};
        try {
          acc.add(lw - beta * model.fast_energy(c), 0.5 * (u1 + u2));
        } catch (const DomainError&) {
        }
      }
    }
  }
  if (!(acc.den > 0.0)) throw DomainError("model_reference_sz: model undefined on the whole grid");
  const double s = model.spec().s.value();
  return (model.variant().is_quantum() ? s + 1.0 : s) * acc.mean();
}

std::string criterion_name(CriterionMode mode) {
  return mode == CriterionMode::Supremum ? "supremum" : "difference";
}

CriterionMode parse_criterion_mode(std::string_view name) {
  if (name == "supremum") return CriterionMode::Supremum;
  if (name == "difference") return CriterionMode::Difference;
  throw std::invalid_argument("unknown criterion mode '" + std::string(name) + "' (expected supremum or difference)");
}

namespace {

double max_classical_energy_on_grid(const SpinSystemSpec& spec) {
  constexpr int kGrid = 64;
  std::vector<Vec3> pts;
  for (int i = 0; i < kGrid; ++i) {
    const double u = -1.0 + 2.0 * i / (kGrid - 1);
    const double r = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (int j = 0; j < kGrid; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / kGrid;
      pts.emplace_back(r * std::cos(phi), r * std::sin(phi), u);
    }
  }
  const double s = spec.s.value();
  const double js2 = spec.J * s * s;
  const Vec3 zb = spec.constants.g_mu_B() * s * spec.B;
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec3& a : pts) {
    const double za = zb.dot(a);
    for (const Vec3& b : pts) best = std::max(best, -js2 * a.dot(b) - za - zb.dot(b));
  }
  return best;
}

}  // namespace

double convergence_diagnostic(const SpinSystemSpec& spec, double temperature, CriterionMode mode) {
  if (!(temperature > 0.0)) throw std::invalid_argument("convergence_diagnostic: T must be > 0");
  if (!spec.field_along_z()) throw std::invalid_argument("convergence_diagnostic: B must be along z");
  const double beta = 1.0 / (spec.constants.k_B * temperature);
  const EigenSystem eig = eigendecompose(build_two_spin_hamiltonian(spec));
  const double lmax = eig.max_eigenvalue();
  if (mode == CriterionMode::Supremum) return beta * std::abs(lmax);
  return beta * std::abs(lmax - max_classical_energy_on_grid(spec));
}

double criterion_crossing_temperature(const SpinSystemSpec& spec, CriterionMode mode) {
  // criterion(T) = c / T, so its value at 1 K is the crossing temperature in K
  return convergence_diagnostic(spec, 1.0, mode);
}

std::vector<EdRow> ed_sweep(const SpinSystemSpec& spec, std::span<const double> temperatures) {
  const EigenSystem eig = eigendecompose(build_two_spin_hamiltonian(spec));
  std::vector<EdRow> rows;
  for (double t : temperatures) rows.push_back({t, thermal_expectation_sz(eig, t, spec)});
  return rows;
}

std::vector<double> log_spaced(double t_min, double t_max, int n) {
  if (n < 1 || !(t_min > 0.0) || !(t_max >= t_min)) {
    throw std::invalid_argument("log_spaced: need n >= 1 and 0 < t_min <= t_max");
  }
  std::vector<double> out;
  if (n == 1) return {t_min};
  const double a = std::log(t_min);
  const double b = std::log(t_max);
  for (int i = 0; i < n; ++i) out.push_back(std::exp(a + (b - a) * i / (n - 1)));
  out.front() = t_min;
  out.back() = t_max;
  return out;
}

}  // namespace pisd
