#include "pisd/validation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pisd/effective_model.hpp"
#include "pisd/harness.hpp"

namespace pisd {

namespace {

CoherentConfiguration random_configuration(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  auto draw = [&] {
    for (;;) {
      const Vec3 v(g(rng), g(rng), g(rng));
      const double n = v.norm();
      if (n > 1e-6 && v.z() / n > -0.95) return BlochVector::normalized(v);
    }
  };
  const BlochVector a = draw();
  return {a, draw()};
}

CheckResult finish(CheckResult r) {
  r.passed = r.worst <= r.tolerance;
  std::ostringstream os;
  os.precision(3);
  os << "worst " << r.worst << " (tolerance " << r.tolerance << ")";
  if (!r.detail.empty()) os << "; " << r.detail;
  r.detail = os.str();
  return r;
}

}  // namespace

CheckResult check_closed_form_equivalence() {
  CheckResult r{"closed-form equivalence", false, 0.0, 1e-10, ""};
  const auto temps = log_spaced(0.1, 10.0, 50);
  for (double ratio : {0.0, 1.0, -1.0, -2.0}) {
    const auto spec = SpinSystemSpec::with_exchange_ratio(Spin(1), ratio, 1.0);
    const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
    for (double t : temps) {
      const double want = closed_form_sz_half(t, spec.J, 1.0, spec.constants);
      r.worst = std::max(r.worst, std::abs(thermal_expectation_sz(eig, t, spec) - want) / std::abs(want));
    }
  }
  return finish(r);
}

CheckResult check_moment_suite(int n_configs, std::uint64_t seed) {
  CheckResult r{"coherent-state moments", false, 0.0, 1e-12, ""};
  std::mt19937_64 rng(seed);
  int count = 0;
  for (int two_s : {1, 2, 4}) {
    const Spin s(two_s);
    const double floor = 1e-3 * std::pow(s.value() + 1.0, 3);
    for (int i = 0; i < n_configs; ++i) {
      const auto c = random_configuration(rng);
      const auto z = bloch_to_stereo(c.n1);
      for (MomentKind k : all_moment_kinds()) {
        const bool power = k == MomentKind::SplusPower || k == MomentKind::SminusPower;
        for (int n = 1; n <= (power ? 4 : 1); ++n) {
          const auto brute = brute_moment(moment_operators(k, 1, n), s, c);
          const auto exact = analytic_moment(k, s, z, n);
          r.worst = std::max(r.worst, std::abs(exact - brute) / std::max(std::abs(brute), floor));
          ++count;
        }
      }
    }
  }
  r.detail = std::to_string(count) + " comparisons";
  return finish(r);
}

CheckResult check_eigen_overlap_identity(int n_configs, std::uint64_t seed) {
  CheckResult r{"eigen-overlap identity", false, 0.0, 1e-10, ""};
  std::mt19937_64 rng(seed);
  for (int two_s : {1, 2, 4}) {
    const auto spec = SpinSystemSpec::with_exchange_ratio(Spin(two_s), 1.0, 1.0);
    const Matrix h = build_two_spin_hamiltonian(spec).matrix;
    for (double t : {1.0, 10.0}) {
      const EffectiveFieldModel model(ModelVariant::eigen_overlap(), spec, t);
      const double beta = model.beta();
      const Matrix rho = (-beta * h).exp();
      for (int i = 0; i < n_configs; ++i) {
        const auto c = random_configuration(rng);
        const Vector psi = coherent_state_vector(spec.s, c).amplitudes;
        const double want = -std::log(psi.dot(rho * psi).real()) / beta;
        r.worst = std::max(r.worst, std::abs(model.effective_hamiltonian(c) - want) / std::abs(want));
      }
    }
  }
  return finish(r);
}

CheckResult check_route_agreement(int n_configs, std::uint64_t seed) {
  CheckResult r{"direct and contracted routes", false, 0.0, 1e-10, ""};
  std::mt19937_64 rng(seed);
  const std::vector<ModelVariant> variants{ModelVariant::series_exact(4), ModelVariant::series_high_t(3),
                                           ModelVariant::difference(3), ModelVariant::eigen_overlap()};
  int skipped = 0;
  for (int two_s : {1, 2, 4}) {
    const auto spec = SpinSystemSpec::with_exchange_ratio(Spin(two_s), -2.0, 1.0);
    for (const auto& v : variants) {
      const EffectiveFieldModel model(v, spec, 5.0);
      const double scale = spec.constants.g_mu_B();
      for (int i = 0; i < n_configs; ++i) {
        const auto c = random_configuration(rng);
        try {
          const double direct = model.effective_hamiltonian(c);
          r.worst = std::max(r.worst, std::abs(model.fast_energy(c) - direct) / std::max(std::abs(direct), scale));
        } catch (const DomainError&) {
          ++skipped;
        }
      }
    }
  }
  r.detail = std::to_string(skipped) + " configurations outside the model domain";
  return finish(r);
}

std::vector<CheckResult> run_validation_suite(std::uint64_t seed) {
  return {check_closed_form_equivalence(), check_moment_suite(100, seed), check_eigen_overlap_identity(100, seed + 1),
          check_route_agreement(50, seed + 2)};
}

}  // namespace pisd
