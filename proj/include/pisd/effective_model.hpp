#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pisd/coherent_states.hpp"
#include "pisd/quantum_core.hpp"

namespace pisd {

enum class ModelKind { Classical, SeriesExact, SeriesHighT, DifferenceExpansion, EigenOverlap };

struct ModelVariant {
  ModelKind kind = ModelKind::Classical;
  int order = 0;  // N for the series and difference variants, ignored otherwise

  static ModelVariant classical() { return {ModelKind::Classical, 0}; }
  static ModelVariant series_exact(int n) { return {ModelKind::SeriesExact, n}; }
  static ModelVariant series_high_t(int n) { return {ModelKind::SeriesHighT, n}; }
  static ModelVariant difference(int n) { return {ModelKind::DifferenceExpansion, n}; }
  static ModelVariant eigen_overlap() { return {ModelKind::EigenOverlap, 0}; }

  bool has_order() const noexcept {
    return kind == ModelKind::SeriesExact || kind == ModelKind::SeriesHighT ||
           kind == ModelKind::DifferenceExpansion;
  }
  // Quantum-corrected variants report <S_z> with C = hbar (s+1), the classical one with hbar s.
  bool is_quantum() const noexcept { return kind != ModelKind::Classical; }

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

// CLI names: classical, series-exact, series-high-t, difference, eigen-overlap.
std::string model_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
// Throws std::invalid_argument when an order-bearing variant has order < 1.
void validate_variant(const ModelVariant& v);

// The effective Hamiltonian cannot be evaluated at this configuration, e.g.
// because a truncated series went non-positive under the logarithm.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct FieldSample {
  Vec3 b1 = Vec3::Zero();  // T
  Vec3 b2 = Vec3::Zero();  // T
  double energy = 0.0;     // J
};

// -J s^2 n1.n2 - g mu_B s B.(n1 + n2)
double classical_energy(const SpinSystemSpec& spec, const CoherentConfiguration& config);

// Effective Hamiltonian of one variant at one temperature.
//
// Energies come from two independent routes. effective_hamiltonian() applies H
// to the coherent-state vector term by term (or sums eigen-overlaps), while
// effective_field() and fast_energy() use operators assembled once at
// construction and contracted against one site at a time. Tests hold the two
// routes against each other.
class EffectiveFieldModel {
 public:
  // Diagonalises the spec's Hamiltonian when the variant needs it. T = 0 is
  // only accepted for the classical variant.
  EffectiveFieldModel(ModelVariant variant, const SpinSystemSpec& spec, double temperature);
  // Reuses an existing eigensystem of the same spec.
  EffectiveFieldModel(ModelVariant variant, const SpinSystemSpec& spec, double temperature,
                      std::shared_ptr<const EigenSystem> eig);

  const ModelVariant& variant() const noexcept { return variant_; }
  const SpinSystemSpec& spec() const noexcept { return spec_; }
  double temperature() const noexcept { return temperature_; }
  double beta() const noexcept { return beta_; }
  const std::shared_ptr<const EigenSystem>& eigensystem() const noexcept { return eig_; }

  // F[beta, N] = sum_{k=1..N} (-beta)^k / k! <H^k>. Series variants only.
  double series_F(const CoherentConfiguration& config) const;

  // Direct route. Throws DomainError where the logarithm's argument is <= 0.
  double effective_hamiltonian(const CoherentConfiguration& config) const;

  // Contracted-operator route, same value as effective_hamiltonian().
  double fast_energy(const CoherentConfiguration& config) const;

  // Per-site fields -grad H_eff / mu_s. Quantum variants use a five-point
  // central difference with step kFieldStep on the ambient coordinates, each
  // evaluation point renormalised onto the sphere.
  FieldSample effective_field(const CoherentConfiguration& config) const;

  static constexpr double kFieldStep = 1e-6;

 private:
  struct SiteForms;

  void build_operators();
  double combine(const double* forms, const Vec3& n1, const Vec3& n2) const;
  double site_energy(const SiteForms& forms, const Vec3& n_site, const Vec3& n1,
                     const Vec3& n2, int site) const;
  void contract(const Vec3& n_other, int site, SiteForms& out) const;

  ModelVariant variant_;
  SpinSystemSpec spec_;
  double temperature_;
  double beta_;
  std::shared_ptr<const EigenSystem> eig_;
  Matrix hamiltonian_;
  // Centring shift for the difference expansion, J.
  double shift_ = 0.0;
  std::vector<Matrix> ops_;
};

}  // namespace pisd
