#pragma once

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <string>

#include "pisd/constants.hpp"

namespace pisd {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

// Half-integer spin quantum number, stored as 2s so that s = 1/2, 3/2, ...
// are exact.
class Spin {
 public:
  explicit Spin(int two_s);
  // Throws std::invalid_argument unless 2s is a positive integer.
  static Spin from_value(double s);

  int two_s() const noexcept { return two_s_; }
  double value() const noexcept { return 0.5 * two_s_; }
  // Single-site Hilbert space dimension 2s+1.
  int dim() const noexcept { return two_s_ + 1; }
  // Two-site product space dimension (2s+1)^2.
  int pair_dim() const noexcept { return dim() * dim(); }

  friend bool operator==(Spin a, Spin b) noexcept { return a.two_s_ == b.two_s_; }

 private:
  int two_s_;
};

std::string to_string(Spin s);

struct SpinSystemSpec {
  Spin s{1};
  double J = 0.0;             // exchange energy in J; > 0 ferromagnetic
  Vec3 B = Vec3::Zero();      // applied field in T
  double alpha = 0.5;         // Gilbert damping
  PhysicalConstants constants{};

  // J = ratio * g mu_B * |B_z|, the parameterisation used for every reference curve.
  static SpinSystemSpec with_exchange_ratio(Spin s, double ratio, double Bz, double alpha = 0.5);

  double mu_s() const noexcept { return constants.g_mu_B() * s.value(); }
  bool field_along_z() const noexcept;

  // Throws std::invalid_argument on non-finite field/exchange or alpha < 0.
  void validate() const;
};

// Site operators in the basis |p>, p = s - m = 0..2s, in units of hbar.
struct SpinMatrices {
  Matrix sx, sy, sz;
  Matrix splus() const { return sx + std::complex<double>(0, 1) * sy; }
  Matrix sminus() const { return sx - std::complex<double>(0, 1) * sy; }
};

SpinMatrices build_spin_matrices(Spin s);
SpinMatrices build_spin_matrices(double s);

// Dense two-site Hamiltonian in Joules. Basis index = p1 * (2s+1) + p2.
struct TwoSpinHamiltonian {
  Matrix matrix;
  Spin s{1};
};

TwoSpinHamiltonian build_two_spin_hamiltonian(const SpinSystemSpec& spec);

struct EigenSystem {
  Eigen::VectorXd eigenvalues;  // ascending, J
  Matrix eigenvectors;          // orthonormal columns in the product basis
  Spin s{1};

  double min_eigenvalue() const { return eigenvalues(0); }
  double max_eigenvalue() const { return eigenvalues(eigenvalues.size() - 1); }
};

// Throws std::invalid_argument if the input deviates from Hermitian by more
// than 1e-10 of its largest entry.
EigenSystem eigendecompose(const TwoSpinHamiltonian& H);

// <S_z> / hbar with S_z = (S_z1 + S_z2) / 2.
double thermal_expectation_sz(const EigenSystem& eig, double temperature,
                              const SpinSystemSpec& spec);

// Two s = 1/2 spins with B along z. Returns <S_z> / hbar.
double closed_form_sz_half(double temperature, double J, double Bz,
                           const PhysicalConstants& constants = {});

// <j1 m1; j2 m2 | S M>, Condon-Shortley phase convention.
double clebsch_gordan(double j1, double m1, double j2, double m2, double S, double M);

}  // namespace pisd
