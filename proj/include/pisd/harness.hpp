#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pisd/effective_model.hpp"
#include "pisd/sllg.hpp"

namespace pisd {

struct ThermalAverage {
  double sz_over_hbar = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

// Each inner vector holds one realization's equilibrated samples of the
// site-averaged n_z. Returns C <n_z> / hbar with C = hbar (s+1) for quantum
// models and hbar s otherwise. The standard error comes from the spread of the
// realization means, or from ten batch means when there is one realization.
ThermalAverage thermal_average(std::span<const std::vector<double>> realizations,
                               const SpinSystemSpec& spec, bool quantum);

struct SweepConfig {
  SpinSystemSpec spec;
  ModelVariant variant = ModelVariant::classical();
  std::vector<double> temperatures;  // K
  double dt = 5e-15;                 // s
  double t_equil = 1e-9;             // s
  double t_average = 2e-9;           // s
  int n_realizations = 5;
  int sample_stride = 10;            // steps between samples
  std::uint64_t seed = 1;
  // A row fails when more than this fraction of its steps were rejected by
  // the model's domain check.
  double max_rejected_fraction = 1e-3;
  unsigned threads = 0;              // 0 = hardware concurrency

  // Throws std::invalid_argument on any out-of-range field.
  void validate() const;
};

struct SweepRow {
  double temperature = 0.0;
  double sz_over_hbar = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  ModelVariant variant;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t rejected_steps = 0;
  double wall_time_s = 0.0;
  bool ok = true;
  std::string failure;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ascending temperature
  bool all_failed() const;
};

// Runs n_realizations independent trajectories per temperature from uniform
// random orientations, discards t_equil and averages over t_average.
// Realizations run on a thread pool; the result does not depend on scheduling.
SweepResult run_temperature_sweep(const SweepConfig& cfg);

// Initial orientations for one realization, drawn uniformly on each sphere and
// redrawn (up to 1000 times) until the model can evaluate its field there.
CoherentConfiguration initial_configuration(const EffectiveFieldModel& model, std::uint64_t seed,
                                            std::uint32_t realization);

// Raised when the classical quadrature does not settle within its grid budget.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// <n_z> (site average) under exp(-beta H_classical), by Gauss-Legendre in
// cos(theta) and the trapezoid rule in the relative azimuth, refined until
// successive grids agree to 1e-8.
double classical_reference_quadrature(const SpinSystemSpec& spec, double temperature);

// <S_z>/hbar of the stationary density exp(-beta H_eff) of a model, with the
// same C factor as the sweep. Points where the model cannot be evaluated get
// zero weight. Requires B along z. `n` is the Gauss-Legendre order per polar
// angle; the relative azimuth uses 2n points.
double model_reference_sz(const EffectiveFieldModel& model, int n = 32);

enum class CriterionMode { Supremum, Difference };

std::string criterion_name(CriterionMode mode);
CriterionMode parse_criterion_mode(std::string_view name);

// Series convergence estimates, compared against 1. Supremum: beta |lambda_max|.
// Difference: beta |lambda_max - max H_classical| with the classical maximum
// taken over a 64 x 64 (cos(theta), phi) grid per sphere. Both need B along z.
double convergence_diagnostic(const SpinSystemSpec& spec, double temperature, CriterionMode mode);

// Temperature at which the criterion equals 1 (it scales as 1/T).
double criterion_crossing_temperature(const SpinSystemSpec& spec, CriterionMode mode);

struct EdRow {
  double temperature = 0.0;
  double sz_over_hbar = 0.0;
};

std::vector<EdRow> ed_sweep(const SpinSystemSpec& spec, std::span<const double> temperatures);

// n log-spaced points in [t_min, t_max]; n = 1 gives t_min.
std::vector<double> log_spaced(double t_min, double t_max, int n);

}  // namespace pisd
