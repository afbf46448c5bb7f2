#pragma once

#include <cstdint>
#include <functional>

#include "pisd/effective_model.hpp"
#include "pisd/rng.hpp"

namespace pisd {

struct SimState {
  CoherentConfiguration config;
  double time = 0.0;            // s
  std::uint64_t step_index = 0;
};

struct NoiseSettings {
  double alpha = 0.5;
  double temperature = 0.0;     // K; 0 switches the noise off
  double mu_s = 0.0;            // J/T
  double gamma = 0.0;           // rad s^-1 T^-1
  double k_B = PhysicalConstants{}.k_B;
  std::uint64_t seed = 0;
  std::uint32_t realization = 0;

  static NoiseSettings for_spec(const SpinSystemSpec& spec, double temperature, std::uint64_t seed,
                                std::uint32_t realization);

  // Per-component variance of the field noise, 2 alpha k_B T / (mu_s gamma dt), in T^2.
  double variance(double dt) const;
  double sigma(double dt) const { return std::sqrt(variance(dt)); }
};

// Field noise (T) for both sites at one step. Drawn from the counter space
// (seed, realization, step) so it is independent of evaluation order.
std::array<Vec3, 2> noise_fields(const NoiseSettings& noise, std::uint64_t step_index, double dt);

// dn/dt = -gamma/(1+alpha^2) (n x B + alpha n x (n x B))
Vec3 llg_drift(const Vec3& n, const Vec3& b, double alpha, double gamma);

// A model DomainError raised during a step, with the temperature and the
// configuration at which the step was attempted.
class SimulationDomainError : public DomainError {
 public:
  SimulationDomainError(const std::string& what, double temperature, CoherentConfiguration config)
      : DomainError(what), temperature_(temperature), config_(config) {}
  double temperature() const noexcept { return temperature_; }
  const CoherentConfiguration& config() const noexcept { return config_; }

 private:
  double temperature_;
  CoherentConfiguration config_;
};

// A configuration together with the effective field evaluated there.
struct EvaluatedConfiguration {
  CoherentConfiguration config;
  FieldSample field;
};

// Evaluates the field, rethrowing model DomainErrors as SimulationDomainError
// with the temperature and configuration attached.
EvaluatedConfiguration evaluate(const EffectiveFieldModel& model, const CoherentConfiguration& config);

class Integrator {
 public:
  virtual ~Integrator() = default;

  // Advances by dt (s) under a fixed noise field eta (T) per site. `start`
  // carries the field at the start point; the result carries the field at the
  // end point, so an accepted step always lands where the model is defined.
  // Throws SimulationDomainError when the field cannot be evaluated along the step.
  virtual EvaluatedConfiguration advance(const EvaluatedConfiguration& start, const EffectiveFieldModel& model,
                                         const std::array<Vec3, 2>& eta, double alpha, double gamma,
                                         double dt) const = 0;

  // One step with the noise drawn for state.step_index.
  SimState step(const SimState& state, const EffectiveFieldModel& model, const NoiseSettings& noise,
                double dt) const;
};

// Stratonovich Heun: the same noise enters predictor and corrector, and both
// spins are renormalised after each stage. Two field evaluations per step:
// the predictor point and the end point.
class HeunIntegrator final : public Integrator {
 public:
  EvaluatedConfiguration advance(const EvaluatedConfiguration& start, const EffectiveFieldModel& model,
                                 const std::array<Vec3, 2>& eta, double alpha, double gamma,
                                 double dt) const override;
};

enum class DomainPolicy {
  Propagate,   // rethrow the first SimulationDomainError
  RejectStep,  // keep the configuration, advance the clock and count the rejection
  // Retry a failing step as two half steps whose noise is refined from the
  // same Wiener increment (Brownian bridge), down to dt / 2^kMaxSubdivision;
  // reject as above if that still fails.
  Subdivide,
};

inline constexpr int kMaxSubdivision = 12;

struct SimulationStats {
  std::uint64_t steps = 0;
  std::uint64_t rejected = 0;
  std::uint64_t subdivided = 0;  // steps that needed at least one split
};

using StepObserver = std::function<void(const SimState&)>;

// Runs round(t_total / dt) steps from `state` (updated in place) and calls
// `observer` after each one. Deterministic for fixed inputs.
SimulationStats simulate(SimState& state, const EffectiveFieldModel& model, const NoiseSettings& noise,
                         double dt, double t_total, const StepObserver& observer = {},
                         DomainPolicy policy = DomainPolicy::Propagate,
                         const Integrator& integrator = HeunIntegrator{});

}  // namespace pisd
