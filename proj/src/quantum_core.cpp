#include "pisd/quantum_core.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pisd {

Spin::Spin(int two_s) : two_s_(two_s) {
  if (two_s < 1) throw std::invalid_argument("spin: 2s must be a positive integer");
}

Spin Spin::from_value(double s) {
  const double two_s = 2.0 * s;
  if (!std::isfinite(two_s) || two_s < 0.5 || std::abs(two_s - std::round(two_s)) > 1e-9) {
    throw std::invalid_argument("spin: s must be a positive half-integer, got " + std::to_string(s));
  }
  return Spin(static_cast<int>(std::lround(two_s)));
}

std::string to_string(Spin s) {
  if (s.two_s() % 2 == 0) return std::to_string(s.two_s() / 2);
  return std::to_string(s.two_s()) + "/2";
}

SpinSystemSpec SpinSystemSpec::with_exchange_ratio(Spin s, double ratio, double Bz, double alpha) {
  SpinSystemSpec spec;
  spec.s = s;
  spec.B = Vec3(0.0, 0.0, Bz);
  spec.alpha = alpha;
  spec.J = ratio * spec.constants.g_mu_B() * std::abs(Bz);
  return spec;
}

bool SpinSystemSpec::field_along_z() const noexcept {
  const double scale = B.norm();
  return std::abs(B.x()) <= 1e-12 * scale && std::abs(B.y()) <= 1e-12 * scale;
}

void SpinSystemSpec::validate() const {
  if (!std::isfinite(J)) throw std::invalid_argument("spec: exchange J must be finite");
  if (!B.allFinite()) throw std::invalid_argument("spec: field B must be finite");
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw std::invalid_argument("spec: damping alpha must be finite and >= 0");
  }
}

SpinMatrices build_spin_matrices(Spin spin) {
  const int d = spin.dim();
  const double s = spin.value();
  Matrix sp = Matrix::Zero(d, d);
  Matrix sm = Matrix::Zero(d, d);
  Matrix sz = Matrix::Zero(d, d);
  for (int p = 0; p < d; ++p) {
    sz(p, p) = s - p;
    // S+ |p> = sqrt(p (2s - p + 1)) |p - 1>, S- |p> = sqrt((2s - p)(p + 1)) |p + 1>
    if (p > 0) sp(p - 1, p) = std::sqrt(p * (2.0 * s - p + 1.0));
    if (p < d - 1) sm(p + 1, p) = std::sqrt((2.0 * s - p) * (p + 1.0));
  }
  const std::complex<double> i(0.0, 1.0);
  return SpinMatrices{0.5 * (sp + sm), (sp - sm) / (2.0 * i), sz};
}

SpinMatrices build_spin_matrices(double s) { return build_spin_matrices(Spin::from_value(s)); }

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out = Eigen::kroneckerProduct(a, b);
  return out;
}

}  // namespace

TwoSpinHamiltonian build_two_spin_hamiltonian(const SpinSystemSpec& spec) {
  spec.validate();
  const auto ops = build_spin_matrices(spec.s);
  const Matrix id = Matrix::Identity(spec.s.dim(), spec.s.dim());
  const Matrix exchange = kron(ops.sx, ops.sx) + kron(ops.sy, ops.sy) + kron(ops.sz, ops.sz);
  const Matrix b_dot_s = spec.B.x() * ops.sx + spec.B.y() * ops.sy + spec.B.z() * ops.sz;
  const Matrix zeeman = kron(b_dot_s, id) + kron(id, b_dot_s);
  return TwoSpinHamiltonian{-spec.J * exchange - spec.constants.g_mu_B() * zeeman, spec.s};
}

EigenSystem eigendecompose(const TwoSpinHamiltonian& H) {
  const Matrix& m = H.matrix;
  if (m.rows() != m.cols() || m.rows() != H.s.pair_dim()) {
    throw std::invalid_argument("eigendecompose: matrix must be square of dimension (2s+1)^2");
  }
  const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw std::invalid_argument("eigendecompose: input is not Hermitian");
  }

  EigenSystem out;
  out.s = H.s;
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
    const Eigen::MatrixXd real = 0.5 * (m.real() + m.real().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(real);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecompose: solver failed");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors().cast<std::complex<double>>();
  } else {
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecompose: solver failed");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
  }
  return out;
}

double thermal_expectation_sz(const EigenSystem& eig, double temperature,
                              const SpinSystemSpec& spec) {
  if (!(temperature > 0.0)) throw std::invalid_argument("thermal_expectation_sz: T must be > 0");
  const double beta = 1.0 / (spec.constants.k_B * temperature);
  const int d = eig.s.dim();
  const double s = eig.s.value();
  const double lambda_min = eig.min_eigenvalue();

  double z = 0.0;
  double weighted_sz = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    const double w = std::exp(-beta * (eig.eigenvalues(k) - lambda_min));
    double sz_k = 0.0;
    for (int p1 = 0; p1 < d; ++p1) {
      for (int p2 = 0; p2 < d; ++p2) {
        sz_k += std::norm(eig.eigenvectors(p1 * d + p2, k)) * ((s - p1) + (s - p2));
      }
    }
    z += w;
    weighted_sz += w * sz_k;
  }
  return 0.5 * weighted_sz / z;
}

double closed_form_sz_half(double temperature, double J, double Bz,
                           const PhysicalConstants& constants) {
  if (!(temperature > 0.0)) throw std::invalid_argument("closed_form_sz_half: T must be > 0");
  const double beta = 1.0 / (constants.k_B * temperature);
  const double x = beta * constants.g_mu_B() * Bz;
  const std::array<double, 4> exponents{-beta * J, 0.0, -x, x};
  const double shift = *std::max_element(exponents.begin(), exponents.end());
  double den = 0.0;
  for (double a : exponents) den += std::exp(a - shift);
  const double num = std::exp(x - shift) - std::exp(-x - shift);
  return 0.5 * num / den;
}

namespace {

bool is_half_integer(double x) {
  return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9;
}

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

double factorial(int n) {
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n > 170) throw std::invalid_argument("clebsch_gordan: factorial argument out of range");
  return table[n];
}

int as_int(double x) { return static_cast<int>(std::lround(x)); }

}  // namespace

double clebsch_gordan(double j1, double m1, double j2, double m2, double S, double M) {
  for (double v : {j1, m1, j2, m2, S, M}) {
    if (!is_half_integer(v)) throw std::invalid_argument("clebsch_gordan: arguments must be half-integers");
  }
  if (j1 < 0 || j2 < 0 || S < 0) throw std::invalid_argument("clebsch_gordan: negative angular momentum");
  if (std::abs(m1) > j1 + 1e-9 || std::abs(m2) > j2 + 1e-9 || std::abs(M) > S + 1e-9) {
    throw std::invalid_argument("clebsch_gordan: |m| exceeds j");
  }
  if (!is_integer(j1 + m1) || !is_integer(j2 + m2) || !is_integer(S + M)) {
    throw std::invalid_argument("clebsch_gordan: j + m must be integer");
  }
  if (S < std::abs(j1 - j2) - 1e-9 || S > j1 + j2 + 1e-9 || !is_integer(j1 + j2 + S)) {
    throw std::invalid_argument("clebsch_gordan: triangle condition violated");
  }
  if (std::abs(M - (m1 + m2)) > 1e-9) return 0.0;

  // Racah's closed formula.
  const double prefactor = std::sqrt(
      (2.0 * S + 1.0) * factorial(as_int(S + j1 - j2)) * factorial(as_int(S - j1 + j2)) *
      factorial(as_int(j1 + j2 - S)) / factorial(as_int(j1 + j2 + S + 1.0)));
  const double norm = std::sqrt(factorial(as_int(S + M)) * factorial(as_int(S - M)) *
                                factorial(as_int(j1 - m1)) * factorial(as_int(j1 + m1)) *
                                factorial(as_int(j2 - m2)) * factorial(as_int(j2 + m2)));
  double sum = 0.0;
  const int kmax = as_int(std::min({j1 + j2 - S, j1 - m1, j2 + m2}));
  const int kmin = std::max({0, as_int(j2 - S - m1), as_int(j1 + m2 - S)});
  for (int k = kmin; k <= kmax; ++k) {
    const double denom = factorial(k) * factorial(as_int(j1 + j2 - S) - k) *
                         factorial(as_int(j1 - m1) - k) * factorial(as_int(j2 + m2) - k) *
                         factorial(as_int(S - j2 + m1) + k) * factorial(as_int(S - j1 - m2) + k);
    sum += ((k % 2 == 0) ? 1.0 : -1.0) / denom;
  }
  return prefactor * norm * sum;
}

}  // namespace pisd
