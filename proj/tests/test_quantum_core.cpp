#include <doctest.h>

#include <cmath>
#include <vector>

#include "pisd/harness.hpp"
#include "pisd/quantum_core.hpp"

using namespace pisd;

namespace {

const PhysicalConstants kC{};
const double kGmuB = kC.g_mu_B();

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

SpinSystemSpec half_spec(double j_over_gmub, double bz) {
  SpinSystemSpec s;
  s.s = Spin(1);
  s.J = j_over_gmub * kGmuB;
  s.B = Vec3(0, 0, bz);
  return s;
}

}  // namespace

TEST_CASE("physical constants carry the fixed SI values") {
  CHECK(kC.k_B == 1.380649e-23);
  CHECK(kC.mu_B == 9.2740100783e-24);
  CHECK(kC.g == 2.00231930436256);
  CHECK(kC.hbar == 1.054571817e-34);
}

TEST_CASE("spin quantum number validation") {
  CHECK(Spin::from_value(0.5).two_s() == 1);
  CHECK(Spin::from_value(3.0).dim() == 7);
  CHECK_THROWS_AS(Spin::from_value(0.3), std::invalid_argument);
  CHECK_THROWS_AS(Spin::from_value(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Spin::from_value(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Spin(0), std::invalid_argument);
  CHECK_THROWS_AS(build_spin_matrices(1.25), std::invalid_argument);
}

TEST_CASE("spin matrices") {
  SUBCASE("s = 1/2 gives hbar/2 Pauli matrices") {
    const auto m = build_spin_matrices(0.5);
    CHECK(m.sz(0, 0).real() == doctest::Approx(0.5));
    CHECK(m.sz(1, 1).real() == doctest::Approx(-0.5));
    CHECK(std::abs(m.sx(0, 1) - 0.5) < 1e-15);
    CHECK(std::abs(m.sx(1, 0) - 0.5) < 1e-15);
    CHECK(std::abs(m.sy(0, 1) - std::complex<double>(0, -0.5)) < 1e-15);
  }
  SUBCASE("s = 1 has sz = diag(1, 0, -1)") {
    const auto m = build_spin_matrices(1.0);
    CHECK(max_abs(m.sz - Eigen::Vector3cd(1, 0, -1).asDiagonal().toDenseMatrix()) < 1e-15);
  }
  SUBCASE("algebra closes for every cyclic pair") {
    const std::complex<double> i(0, 1);
    for (double s : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
      CAPTURE(s);
      const auto m = build_spin_matrices(s);
      CHECK(max_abs(m.sx * m.sy - m.sy * m.sx - i * m.sz) <= 1e-12);
      CHECK(max_abs(m.sy * m.sz - m.sz * m.sy - i * m.sx) <= 1e-12);
      CHECK(max_abs(m.sz * m.sx - m.sx * m.sz - i * m.sy) <= 1e-12);
      for (const Matrix* a : {&m.sx, &m.sy, &m.sz}) CHECK(max_abs(*a - a->adjoint()) == 0.0);
      // Casimir s(s+1)
      const Matrix s2 = m.sx * m.sx + m.sy * m.sy + m.sz * m.sz;
      CHECK(max_abs(s2 - s * (s + 1) * Matrix::Identity(s2.rows(), s2.cols())) < 1e-12);
      Eigen::SelfAdjointEigenSolver<Matrix> es(m.sz);
      const int d = static_cast<int>(2 * s + 1);
      for (int k = 0; k < d; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(-s + k));
    }
  }
}

TEST_CASE("two-spin Hamiltonian") {
  SUBCASE("s = 1/2 matrix in the product basis") {
    const double bz = 1.3;
    const auto spec = half_spec(0.7, bz);
    const double J = spec.J;
    const Matrix h = build_two_spin_hamiltonian(spec).matrix;
    const double z = kGmuB * bz;
    Eigen::Matrix4d expected = Eigen::Matrix4d::Zero();
    expected.diagonal() << -z - J / 4, J / 4, J / 4, z - J / 4;
    expected(1, 2) = expected(2, 1) = -J / 2;
    CHECK(max_abs(h - expected.cast<std::complex<double>>()) <= 1e-12 * J);
  }
  SUBCASE("J = 0 and B = 0 give the zero matrix") {
    for (int two_s : {1, 2, 4}) {
      SpinSystemSpec spec;
      spec.s = Spin(two_s);
      CHECK(max_abs(build_two_spin_hamiltonian(spec).matrix) == 0.0);
    }
  }
  SUBCASE("zero field spectrum {-J/4 x3, 3J/4}") {
    const auto spec = half_spec(1.0, 0.0);
    const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
    const double J = spec.J;
    CHECK(eig.eigenvalues(0) == doctest::Approx(-J / 4).epsilon(1e-12));
    CHECK(eig.eigenvalues(1) == doctest::Approx(-J / 4).epsilon(1e-12));
    CHECK(eig.eigenvalues(2) == doctest::Approx(-J / 4).epsilon(1e-12));
    CHECK(eig.eigenvalues(3) == doctest::Approx(3 * J / 4).epsilon(1e-12));
  }
  SUBCASE("general field direction is Hermitian, B along z is real symmetric") {
    SpinSystemSpec spec;
    spec.s = Spin(3);
    spec.J = -0.4 * kGmuB;
    spec.B = Vec3(0.3, -0.8, 0.5);
    const Matrix h = build_two_spin_hamiltonian(spec).matrix;
    CHECK(h.rows() == 16);
    CHECK(max_abs(h - h.adjoint()) <= 1e-12 * max_abs(h));
    CHECK(max_abs(h.imag()) > 0.0);
    spec.B = Vec3(0, 0, 2.0);
    const Matrix hz = build_two_spin_hamiltonian(spec).matrix;
    CHECK(max_abs(hz.imag()) == 0.0);
    CHECK(max_abs(hz - hz.transpose()) <= 1e-12 * max_abs(hz));
  }
  SUBCASE("spec validation") {
    SpinSystemSpec spec;
    spec.B = Vec3(0, 0, NAN);
    CHECK_THROWS_AS(build_two_spin_hamiltonian(spec), std::invalid_argument);
    spec.B = Vec3::Zero();
    spec.alpha = -0.1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  }
}

TEST_CASE("eigendecomposition") {
  SUBCASE("s = 1/2 ferromagnet spectrum") {
    const auto spec = half_spec(1.0, 1.0);
    const double J = spec.J;
    const double z = kGmuB;
    const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
    const double expected[] = {-z - J / 4, -J / 4, z - J / 4, 3 * J / 4};
    for (int k = 0; k < 4; ++k) CHECK(eig.eigenvalues(k) == doctest::Approx(expected[k]).epsilon(1e-12));
  }
  SUBCASE("reconstruction, diagonalisation and orthonormality") {
    for (int two_s : {1, 2, 3, 4, 6}) {
      SpinSystemSpec spec;
      spec.s = Spin(two_s);
      spec.J = -1.7 * kGmuB;
      spec.B = Vec3(0.2, 0.1, 0.9);
      const auto h = build_two_spin_hamiltonian(spec);
      const auto eig = eigendecompose(h);
      const Matrix& v = eig.eigenvectors;
      const double scale = max_abs(h.matrix);
      CHECK(max_abs(v * eig.eigenvalues.asDiagonal() * v.adjoint() - h.matrix) <= 1e-10 * scale);
      Matrix d = v.adjoint() * h.matrix * v;
      d.diagonal().setZero();
      CHECK(max_abs(d) <= 1e-10 * scale);
      CHECK(max_abs(v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())) <= 1e-12);
      for (Eigen::Index k = 1; k < eig.eigenvalues.size(); ++k) CHECK(eig.eigenvalues(k) >= eig.eigenvalues(k - 1));
    }
  }
  SUBCASE("degenerate zero-field spectrum keeps an orthonormal basis") {
    for (int two_s : {1, 2, 4}) {
      SpinSystemSpec spec;
      spec.s = Spin(two_s);
      spec.J = kGmuB;
      const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
      const Matrix g = eig.eigenvectors.adjoint() * eig.eigenvectors;
      CHECK(max_abs(g - Matrix::Identity(g.rows(), g.cols())) <= 1e-12);
    }
  }
  SUBCASE("non-Hermitian input is rejected") {
    auto h = build_two_spin_hamiltonian(half_spec(1.0, 1.0));
    h.matrix(0, 1) += 1e-3 * kGmuB;
    CHECK_THROWS_AS(eigendecompose(h), std::invalid_argument);
  }
  SUBCASE("wrong dimension is rejected") {
    TwoSpinHamiltonian h{Matrix::Identity(3, 3), Spin(1)};
    CHECK_THROWS_AS(eigendecompose(h), std::invalid_argument);
  }
}

TEST_CASE("thermal expectation of S_z") {
  SUBCASE("equals the closed form for s = 1/2 over [0.1, 10] K") {
    for (double jr : {0.0, 1.0, -1.0, 2.0, -2.0}) {
      const auto spec = half_spec(jr, 1.0);
      const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
      for (double t : log_spaced(0.05, 50.0, 50)) {
        CAPTURE(jr);
        CAPTURE(t);
        const double exact = closed_form_sz_half(t, spec.J, 1.0);
        CHECK(std::abs(thermal_expectation_sz(eig, t, spec) - exact) <= 1e-10 * std::abs(exact));
      }
    }
  }
  SUBCASE("limits") {
    const auto spec = half_spec(1.0, 1.0);
    const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
    CHECK(std::abs(thermal_expectation_sz(eig, 1e6, spec)) <= 1e-4);
    CHECK(std::abs(thermal_expectation_sz(eig, 0.01, spec) - 0.5) <= 1e-6);
    CHECK_THROWS_AS(thermal_expectation_sz(eig, 0.0, spec), std::invalid_argument);
    CHECK_THROWS_AS(thermal_expectation_sz(eig, -1.0, spec), std::invalid_argument);
  }
  SUBCASE("invariant under a constant energy shift") {
    for (int two_s : {1, 3, 4}) {
      SpinSystemSpec spec;
      spec.s = Spin(two_s);
      spec.J = -2 * kGmuB;
      spec.B = Vec3(0, 0, 1);
      auto h = build_two_spin_hamiltonian(spec);
      const auto e0 = eigendecompose(h);
      h.matrix += 37.0 * kGmuB * Matrix::Identity(h.matrix.rows(), h.matrix.cols());
      const auto e1 = eigendecompose(h);
      for (double t : {0.2, 1.0, 7.0}) {
        const double a = thermal_expectation_sz(e0, t, spec);
        CHECK(std::abs(thermal_expectation_sz(e1, t, spec) - a) <= 1e-12 * std::abs(a));
      }
    }
  }
  SUBCASE("low-temperature evaluation does not overflow") {
    const auto spec = half_spec(100.0, 1.0);
    const auto eig = eigendecompose(build_two_spin_hamiltonian(spec));
    const double v = thermal_expectation_sz(eig, 1e-3, spec);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(0.5));
  }
}

TEST_CASE("closed form for two s = 1/2 spins") {
  CHECK(closed_form_sz_half(2.0, kGmuB, 0.0) == 0.0);
  CHECK(closed_form_sz_half(0.01, kGmuB, 1.0) == doctest::Approx(0.5).epsilon(1e-9));
  const double v = closed_form_sz_half(1.0, kGmuB, 1.0);
  CHECK(v == doctest::Approx(0.334).epsilon(2e-3));
  const auto spec = half_spec(1.0, 1.0);
  CHECK(thermal_expectation_sz(eigendecompose(build_two_spin_hamiltonian(spec)), 1.0, spec) ==
        doctest::Approx(v).epsilon(1e-12));
  CHECK(closed_form_sz_half(1e-4, 1e3 * kGmuB, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(closed_form_sz_half(0.0, kGmuB, 1.0), std::invalid_argument);
}

TEST_CASE("Clebsch-Gordan coefficients") {
  SUBCASE("singlet and stretched triplet") {
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == doctest::Approx(-1 / std::sqrt(2.0)));
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 1) == doctest::Approx(1.0));
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(clebsch_gordan(1, 1, 0.5, -0.5, 1.5, 0.5) == doctest::Approx(1 / std::sqrt(3.0)));
    CHECK(clebsch_gordan(1, 0, 0.5, 0.5, 0.5, 0.5) == doctest::Approx(-1 / std::sqrt(3.0)));
  }
  SUBCASE("zero unless M = m1 + m2") {
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 0) == 0.0);
  }
  SUBCASE("unitarity") {
    for (double j1 : {0.5, 1.0, 1.5, 2.0}) {
      for (double j2 : {0.5, 1.0, 2.0}) {
        for (double m1 = -j1; m1 <= j1 + 1e-9; m1 += 1) {
          for (double m2 = -j2; m2 <= j2 + 1e-9; m2 += 1) {
            double sum = 0.0;
            for (double S = std::abs(j1 - j2); S <= j1 + j2 + 1e-9; S += 1) {
              if (std::abs(m1 + m2) <= S + 1e-9) sum += std::pow(clebsch_gordan(j1, m1, j2, m2, S, m1 + m2), 2);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
          }
        }
      }
    }
  }
  SUBCASE("out-of-range arguments throw") {
    CHECK_THROWS_AS(clebsch_gordan(0.5, 1.5, 0.5, 0.5, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(clebsch_gordan(0.3, 0.3, 0.5, 0.5, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(clebsch_gordan(1, 0.5, 0.5, 0.5, 1, 1), std::invalid_argument);
  }
  SUBCASE("coupled basis diagonalises the s = 1/2 Hamiltonian") {
    const auto spec = half_spec(1.0, 1.0);
    const Matrix h = build_two_spin_hamiltonian(spec).matrix;
    // Columns |1,1>, |1,0>, |1,-1>, |0,0>; product index p = 1/2 - m.
    const double SM[4][2] = {{1, 1}, {1, 0}, {1, -1}, {0, 0}};
    Matrix u = Matrix::Zero(4, 4);
    for (int c = 0; c < 4; ++c) {
      for (int p1 = 0; p1 < 2; ++p1) {
        for (int p2 = 0; p2 < 2; ++p2) {
          const double m1 = 0.5 - p1, m2 = 0.5 - p2;
          if (std::abs(m1 + m2 - SM[c][1]) < 1e-9) {
            u(p1 * 2 + p2, c) = clebsch_gordan(0.5, m1, 0.5, m2, SM[c][0], SM[c][1]);
          }
        }
      }
    }
    const double J = spec.J, z = kGmuB;
    Eigen::Vector4d diag(-z - J / 4, -J / 4, z - J / 4, 3 * J / 4);
    const Matrix rotated = u.adjoint() * h * u;
    CHECK(max_abs(rotated - diag.cast<std::complex<double>>().asDiagonal().toDenseMatrix()) <= 1e-12 * max_abs(h));
  }
}
