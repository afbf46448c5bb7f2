#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pisd/rng.hpp"
#include "pisd/sllg.hpp"
#include "test_support.hpp"

using namespace pisd;

namespace {

const PhysicalConstants kC{};

SpinSystemSpec field_only(int two_s, double bz = 1.0, double alpha = 0.5) {
  SpinSystemSpec s;
  s.s = Spin(two_s);
  s.B = Vec3(0, 0, bz);
  s.alpha = alpha;
  return s;
}

// Wraps Heun and fails every attempt longer than max_dt.
class ShortStepsOnly final : public Integrator {
 public:
  explicit ShortStepsOnly(double max_dt) : max_dt_(max_dt) {}
  EvaluatedConfiguration advance(const EvaluatedConfiguration& start, const EffectiveFieldModel& model,
                                 const std::array<Vec3, 2>& eta, double alpha, double gamma,
                                 double dt) const override {
    if (dt > max_dt_ * (1 + 1e-12)) throw SimulationDomainError("too long", model.temperature(), start.config);
    increments.push_back(eta[0] * dt);
    return HeunIntegrator{}.advance(start, model, eta, alpha, gamma, dt);
  }
  mutable std::vector<Vec3> increments;

 private:
  double max_dt_;
};

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using P = Philox4x32;
  CHECK(P::generate({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(P::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(P::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter-addressed normals") {
  const CounterNormal a(42, 3);
  const CounterNormal b(42, 3);
  CHECK(a.pair(1000, 2) == b.pair(1000, 2));
  CHECK(a.pair(1000, 2) != CounterNormal(42, 4).pair(1000, 2));
  CHECK(a.pair(1000, 2) != CounterNormal(43, 3).pair(1000, 2));
  CHECK(a.pair(1000, 2) != a.pair(1001, 2));

  SUBCASE("moments over 1e6 draws") {
    const int n = 500000;
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0, cross = 0;
    for (int i = 0; i < n; ++i) {
      const auto g = a.pair(static_cast<std::uint64_t>(i), 0);
      for (double x : g) {
        m1 += x;
        m2 += x * x;
        m3 += x * x * x;
        m4 += x * x * x * x;
      }
      cross += g[0] * g[1];
    }
    const double N = 2.0 * n;
    CHECK(std::abs(m1 / N) < 5 / std::sqrt(N));
    CHECK(std::abs(m2 / N - 1) < 5 * std::sqrt(2 / N));
    CHECK(std::abs(m3 / N) < 5 * std::sqrt(15 / N));
    CHECK(std::abs(m4 / N - 3) < 5 * std::sqrt(96 / N));
    CHECK(std::abs(cross / n) < 5 / std::sqrt(n));
  }
  SUBCASE("uniforms lie in [0, 1)") {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      for (double u : a.uniform_pair(i, 16)) CHECK((u >= 0.0 && u < 1.0));
    }
  }
}

TEST_CASE("noise settings") {
  const auto spec = field_only(1);
  const auto n = NoiseSettings::for_spec(spec, 2.0, 7, 1);
  const double expected = 2 * 0.5 * kC.k_B * 2.0 / (spec.mu_s() * kC.gyromagnetic_ratio() * 5e-15);
  CHECK(n.variance(5e-15) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(NoiseSettings::for_spec(spec, 0.0, 7, 1).variance(5e-15) == 0.0);
  CHECK(NoiseSettings::for_spec(field_only(1, 1.0, 0.0), 3.0, 7, 1).variance(5e-15) == 0.0);
  CHECK_THROWS_AS(n.variance(0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSettings::for_spec(spec, -1.0, 7, 1), std::invalid_argument);
  const auto zero = noise_fields(NoiseSettings::for_spec(spec, 0.0, 7, 1), 5, 5e-15);
  CHECK(zero[0].norm() == 0.0);

  SUBCASE("field noise has the configured variance") {
    double acc = 0.0;
    const int steps = 100000;
    for (int i = 0; i < steps; ++i) {
      const auto eta = noise_fields(n, static_cast<std::uint64_t>(i), 5e-15);
      acc += eta[0].squaredNorm() + eta[1].squaredNorm();
    }
    CHECK(acc / (6.0 * steps) == doctest::Approx(expected).epsilon(5 * std::sqrt(2.0 / (6 * steps))));
  }
}

TEST_CASE("deterministic drift") {
  const double g = 1.7e11;
  const Vec3 d0 = llg_drift(Vec3::UnitZ(), Vec3::UnitX(), 0.0, g);
  CHECK((d0 - Vec3(0, -g, 0)).norm() < 1e-3);
  const Vec3 d = llg_drift(Vec3::UnitZ(), Vec3::UnitX(), 0.5, g);
  CHECK((d - (-g / 1.25) * Vec3(-0.5, 1, 0)).norm() < 1e-3);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 n = testing::random_unit(rng);
    const Vec3 b = 3 * testing::random_unit(rng);
    CHECK(std::abs(llg_drift(n, b, 0.3, g).dot(n)) < 1e-12 * g * 3);
    CHECK(llg_drift(n, n * 2.0, 0.3, g).norm() < 1e-12 * g);
  }
}

TEST_CASE("zero-temperature damped motion relaxes onto the field") {
  const auto spec = field_only(2, 1.0);
  const EffectiveFieldModel m(ModelVariant::classical(), spec, 0.0);
  SimState st{{BlochVector(Vec3(1, 0, 0)), BlochVector(Vec3(0, -1, 0))}, 0.0, 0};
  const auto noise = NoiseSettings::for_spec(spec, 0.0, 1, 0);
  double worst = 0.0;
  simulate(st, m, noise, 5e-15, 2e-10, [&](const SimState& s) {
    worst = std::max({worst, std::abs(s.config.n1.vec().norm() - 1), std::abs(s.config.n2.vec().norm() - 1)});
  });
  CHECK(st.config.n1.z() > 0.9999);
  CHECK(st.config.n2.z() > 0.9999);
  CHECK(worst < 1e-12);
  CHECK(st.time == doctest::Approx(2e-10));
  CHECK(st.step_index == 40000);
}

TEST_CASE("undamped motion conserves energy") {
  SUBCASE("classical exchange and field") {
    auto spec = SpinSystemSpec::with_exchange_ratio(Spin(1), 1.0, 1.0, 0.0);
    const EffectiveFieldModel m(ModelVariant::classical(), spec, 0.0);
    SimState st{{BlochVector::from_angles(1.0, 0.2), BlochVector::from_angles(2.0, 1.5)}, 0.0, 0};
    const double e0 = classical_energy(spec, st.config);
    simulate(st, m, NoiseSettings::for_spec(spec, 0.0, 1, 0), 5e-15, 5e-10);
    CHECK(std::abs(classical_energy(spec, st.config) - e0) <= 1e-6 * std::abs(e0));
  }
  SUBCASE("quantum effective Hamiltonian") {
    auto spec = SpinSystemSpec::with_exchange_ratio(Spin(1), 1.0, 1.0, 0.0);
    const EffectiveFieldModel m(ModelVariant::eigen_overlap(), spec, 2.0);
    SimState st{{BlochVector::from_angles(1.0, 0.2), BlochVector::from_angles(2.0, 1.5)}, 0.0, 0};
    const double e0 = m.fast_energy(st.config);
    simulate(st, m, NoiseSettings::for_spec(spec, 0.0, 1, 0), 5e-15, 1e-10);
    CHECK(std::abs(m.fast_energy(st.config) - e0) <= 1e-6 * std::abs(e0));
  }
}

TEST_CASE("trajectories are reproducible") {
  const auto spec = SpinSystemSpec::with_exchange_ratio(Spin(1), 1.0, 1.0);
  const EffectiveFieldModel m(ModelVariant::eigen_overlap(), spec, 2.0);
  const SimState start{{BlochVector::from_angles(0.5, 0.1), BlochVector::from_angles(2.5, 4.0)}, 0.0, 0};
  auto run = [&](std::uint32_t realization) {
    SimState st = start;
    simulate(st, m, NoiseSettings::for_spec(spec, 2.0, 99, realization), 5e-15, 5e-12);
    return st;
  };
  const SimState a = run(0);
  const SimState b = run(0);
  CHECK(a.config.n1.vec() == b.config.n1.vec());
  CHECK(a.config.n2.vec() == b.config.n2.vec());
  CHECK(a.config.n1.vec() != run(1).config.n1.vec());

  SUBCASE("splitting a run does not change it") {
    SimState st = start;
    const auto noise = NoiseSettings::for_spec(spec, 2.0, 99, 0);
    simulate(st, m, noise, 5e-15, 2e-12);
    simulate(st, m, noise, 5e-15, 3e-12);
    CHECK(st.config.n1.vec() == a.config.n1.vec());
    CHECK(st.step_index == a.step_index);
  }
  SUBCASE("single step matches simulate") {
    const auto noise = NoiseSettings::for_spec(spec, 2.0, 99, 0);
    const SimState one = HeunIntegrator{}.step(start, m, noise, 5e-15);
    SimState st = start;
    simulate(st, m, noise, 5e-15, 5e-15);
    CHECK(one.config.n2.vec() == st.config.n2.vec());
    CHECK(one.step_index == 1);
  }
}

TEST_CASE("zero-length runs") {
  const auto spec = field_only(1);
  const EffectiveFieldModel m(ModelVariant::classical(), spec, 1.0);
  SimState st{};
  const auto stats = simulate(st, m, NoiseSettings::for_spec(spec, 1.0, 1, 0), 5e-15, 1e-15);
  CHECK(stats.steps == 0);
  CHECK(st.step_index == 0);
  CHECK(st.time == 0.0);
  CHECK_THROWS_AS(simulate(st, m, NoiseSettings::for_spec(spec, 1.0, 1, 0), 0.0, 1e-12), std::invalid_argument);
  CHECK_THROWS_AS(simulate(st, m, NoiseSettings::for_spec(spec, 1.0, 1, 0), 5e-15, -1.0), std::invalid_argument);
}

TEST_CASE("domain policies") {
  const auto spec = field_only(1);
  const EffectiveFieldModel m(ModelVariant::classical(), spec, 1.0);
  const auto noise = NoiseSettings::for_spec(spec, 1.0, 5, 0);
  const double dt = 4e-15;
  const SimState start{{BlochVector::from_angles(1.0, 0.0), BlochVector::from_angles(0.3, 2.0)}, 0.0, 0};

  SUBCASE("propagate rethrows with context") {
    SimState st = start;
    const ShortStepsOnly integ(dt / 2);
    try {
      simulate(st, m, noise, dt, 10 * dt, {}, DomainPolicy::Propagate, integ);
      FAIL("expected a SimulationDomainError");
    } catch (const SimulationDomainError& e) {
      CHECK(e.temperature() == 1.0);
      CHECK(e.config().n1.vec() == start.config.n1.vec());
    }
  }
  SUBCASE("reject keeps the configuration and advances the clock") {
    SimState st = start;
    const ShortStepsOnly integ(dt / 2);
    const auto stats = simulate(st, m, noise, dt, 10 * dt, {}, DomainPolicy::RejectStep, integ);
    CHECK(stats.rejected == 10);
    CHECK(st.step_index == 10);
    CHECK(st.config.n1.vec() == start.config.n1.vec());
  }
  SUBCASE("subdivision splits the Wiener increment consistently") {
    SimState st = start;
    const ShortStepsOnly integ(dt / 4);
    const auto stats = simulate(st, m, noise, dt, 3 * dt, {}, DomainPolicy::Subdivide, integ);
    CHECK(stats.rejected == 0);
    CHECK(stats.subdivided == 3);
    REQUIRE(integ.increments.size() == 12);
    for (std::uint64_t k = 0; k < 3; ++k) {
      const Vec3 w = noise_fields(noise, k, dt)[0] * dt;
      Vec3 sum = Vec3::Zero();
      for (int j = 0; j < 4; ++j) sum += integ.increments[4 * k + j];
      CHECK((sum - w).norm() <= 1e-12 * w.norm());
    }
    CHECK(st.config.n1.vec() != start.config.n1.vec());
  }
  SUBCASE("subdivision gives up below dt / 2^12") {
    SimState st = start;
    const ShortStepsOnly integ(dt / 8192);
    const auto stats = simulate(st, m, noise, dt, 2 * dt, {}, DomainPolicy::Subdivide, integ);
    CHECK(stats.rejected == 2);
    CHECK(st.config.n1.vec() == start.config.n1.vec());
  }
  SUBCASE("subdivided steps converge to the undivided step") {
    SimState coarse = start;
    SimState fine = start;
    simulate(coarse, m, noise, dt, dt);
    const ShortStepsOnly integ(dt / 2);
    simulate(fine, m, noise, dt, dt, {}, DomainPolicy::Subdivide, integ);
    CHECK((coarse.config.n1.vec() - fine.config.n1.vec()).norm() < 1e-3);
  }
}

TEST_CASE("independent realizations sample the Boltzmann distribution") {
  // J = 0: each spin follows p(u) ~ exp(x u), u = n_z, x = g mu_B s B / (k_B T).
  const auto spec = field_only(4, 1.0);
  const double t = 2.0;
  const double x = kC.g_mu_B() * 2.0 * 1.0 / (kC.k_B * t);
  const EffectiveFieldModel m(ModelVariant::classical(), spec, t);
  std::vector<double> samples;
  for (std::uint32_t r = 0; r < 200; ++r) {
    SimState st{{BlochVector(Vec3(0, 0, -1)), BlochVector(Vec3(1, 0, 0))}, 0.0, 0};
    simulate(st, m, NoiseSettings::for_spec(spec, t, 11, r), 2e-14, 2e-10);
    samples.push_back(st.config.n1.z());
    samples.push_back(st.config.n2.z());
  }
  const auto cdf = [x](double u) { return (std::exp(x * u) - std::exp(-x)) / (std::exp(x) - std::exp(-x)); };
  // 1% critical value
  CHECK(ks_statistic(samples, cdf) < 1.63 / std::sqrt(static_cast<double>(samples.size())));
}
