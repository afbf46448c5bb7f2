#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pisd {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed error measure
  double tolerance = 0.0;
  std::string detail;
};

// Numerical ED against the s = 1/2 closed form at 50 log-spaced temperatures
// in [0.1, 10] K for several couplings (relative 1e-10).
CheckResult check_closed_form_equivalence();

// Closed-form coherent-state moments against dense matrix elements
// (relative 1e-12) for s in {1/2, 1, 2}.
CheckResult check_moment_suite(int n_configs, std::uint64_t seed);

// Eigen-overlap H_eff against -(1/beta) ln <z|expm(-beta H)|z> (relative 1e-10).
CheckResult check_eigen_overlap_identity(int n_configs, std::uint64_t seed);

// Contracted-operator energies against the direct route for every variant
// (relative 1e-10).
CheckResult check_route_agreement(int n_configs, std::uint64_t seed);

std::vector<CheckResult> run_validation_suite(std::uint64_t seed);

}  // namespace pisd
