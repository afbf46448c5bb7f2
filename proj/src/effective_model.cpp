#include "pisd/effective_model.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace pisd {

namespace {

constexpr int kMaxOps = 12;

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Classical: return "classical";
    case ModelKind::SeriesExact: return "series-exact";
    case ModelKind::SeriesHighT: return "series-high-t";
    case ModelKind::DifferenceExpansion: return "difference";
    case ModelKind::EigenOverlap: return "eigen-overlap";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : {ModelKind::Classical, ModelKind::SeriesExact, ModelKind::SeriesHighT,
                      ModelKind::DifferenceExpansion, ModelKind::EigenOverlap}) {
    if (model_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected classical, series-exact, series-high-t, difference, eigen-overlap)");
}

void validate_variant(const ModelVariant& v) {
  if (v.has_order() && v.order < 1) {
    throw std::invalid_argument("model " + model_name(v.kind) + " needs order N >= 1");
  }
  if (v.kind == ModelKind::DifferenceExpansion && v.order > kMaxOps) {
    throw std::invalid_argument("difference expansion order is capped at " + std::to_string(kMaxOps));
  }
}

double classical_energy(const SpinSystemSpec& spec, const CoherentConfiguration& config) {
  const double s = spec.s.value();
  const Vec3& n1 = config.n1.vec();
  const Vec3& n2 = config.n2.vec();
  return -spec.J * s * s * n1.dot(n2) - spec.constants.g_mu_B() * s * spec.B.dot(n1 + n2);
}

// Contracted d x d forms, one per operator. Kept per thread and reused so the
// per-step hot path does not allocate.
struct EffectiveFieldModel::SiteForms {
  int count = 0;
  int d = 0;
  std::vector<std::complex<double>> r;
  std::vector<std::complex<double>> scratch;
};

EffectiveFieldModel::EffectiveFieldModel(ModelVariant variant, const SpinSystemSpec& spec,
                                         double temperature)
    : EffectiveFieldModel(variant, spec, temperature, nullptr) {}

EffectiveFieldModel::EffectiveFieldModel(ModelVariant variant, const SpinSystemSpec& spec,
                                         double temperature, std::shared_ptr<const EigenSystem> eig)
    : variant_(variant), spec_(spec), temperature_(temperature), eig_(std::move(eig)) {
  spec_.validate();
  validate_variant(variant_);
  if (spec_.s.two_s() > kMaxTwoS) {
    throw std::invalid_argument("effective model: spin exceeds implementation cap");
  }
  const bool classical = variant_.kind == ModelKind::Classical;
  if (!std::isfinite(temperature) || temperature < 0.0 || (!classical && temperature == 0.0)) {
    throw std::invalid_argument("effective model: temperature must be > 0 (or 0 for the classical model)");
  }
  beta_ = temperature > 0.0 ? 1.0 / (spec_.constants.k_B * temperature)
                            : std::numeric_limits<double>::infinity();
  if (classical) return;

  if (variant_.kind == ModelKind::EigenOverlap) {
    if (!spec_.field_along_z()) {
      throw std::invalid_argument("eigen-overlap model requires the field along the quantisation axis z");
    }
    if (!eig_) eig_ = std::make_shared<const EigenSystem>(eigendecompose(build_two_spin_hamiltonian(spec_)));
    if (!(eig_->s == spec_.s)) throw std::invalid_argument("eigen-overlap model: eigensystem spin mismatch");
  }
  hamiltonian_ = build_two_spin_hamiltonian(spec_).matrix;
  build_operators();
}

void EffectiveFieldModel::build_operators() {
  const Eigen::Index dim = hamiltonian_.rows();
  const Matrix id = Matrix::Identity(dim, dim);
  ops_.clear();
  switch (variant_.kind) {
    case ModelKind::SeriesExact:
    case ModelKind::SeriesHighT: {
      // sum_{k=0..N} (-beta H)^k / k!, whose expectation is 1 + F
      Matrix term = id;
      Matrix sum = id;
      for (int k = 1; k <= variant_.order; ++k) {
        term = (term * hamiltonian_) * (-beta_ / k);
        sum += term;
      }
      ops_.push_back(std::move(sum));
      break;
    }
    case ModelKind::DifferenceExpansion: {
      shift_ = hamiltonian_.trace().real() / static_cast<double>(dim);
      const Matrix a = beta_ * (hamiltonian_ - shift_ * id);
      Matrix p = a;
      for (int j = 1; j <= variant_.order; ++j) {
        ops_.push_back(p);
        p = p * a;
      }
      break;
    }
    case ModelKind::EigenOverlap: {
      const double lmin = eig_->min_eigenvalue();
      Eigen::VectorXd w(eig_->eigenvalues.size());
      for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = std::exp(-beta_ * (eig_->eigenvalues(k) - lmin));
      ops_.push_back(eig_->eigenvectors * w.asDiagonal() * eig_->eigenvectors.adjoint());
      break;
    }
    case ModelKind::Classical:
      break;
  }
}

double EffectiveFieldModel::series_F(const CoherentConfiguration& config) const {
  if (variant_.kind != ModelKind::SeriesExact && variant_.kind != ModelKind::SeriesHighT) {
    throw std::invalid_argument("series_F: model is not a series variant");
  }
  const Vector psi = coherent_state_vector(spec_.s, config).amplitudes;
  Vector w = psi;
  double f = 0.0;
  for (int k = 1; k <= variant_.order; ++k) {
    w = (hamiltonian_ * w) * (-beta_ / k);
    f += psi.dot(w).real();
  }
  return f;
}

double EffectiveFieldModel::effective_hamiltonian(const CoherentConfiguration& config) const {
  switch (variant_.kind) {
    case ModelKind::Classical:
      return classical_energy(spec_, config);
    case ModelKind::SeriesExact: {
      const double one_plus_f = 1.0 + series_F(config);
      if (!(one_plus_f > 0.0)) {
        throw DomainError("series truncation lost positivity: 1 + F = " + fmt_double(one_plus_f));
      }
      return -std::log(one_plus_f) / beta_;
    }
    case ModelKind::SeriesHighT: {
      const double f = series_F(config);
      double sum = 0.0;
      double fk = 1.0;
      for (int k = 1; k <= variant_.order; ++k) {
        fk *= f;
        sum += ((k % 2 == 1) ? 1.0 : -1.0) * fk / k;
      }
      return -sum / beta_;
    }
    case ModelKind::DifferenceExpansion: {
      const double h_cl = classical_energy(spec_, config);
      const Vector psi = coherent_state_vector(spec_.s, config).amplitudes;
      Vector w = psi;
      double sum = 1.0;
      for (int k = 1; k <= variant_.order; ++k) {
        w = (hamiltonian_ * w - h_cl * w) * (-beta_ / k);
        sum += psi.dot(w).real();
      }
      if (!(sum > 0.0)) {
        throw DomainError("difference expansion lost positivity: sum = " + fmt_double(sum));
      }
      return h_cl - std::log(sum) / beta_;
    }
    case ModelKind::EigenOverlap: {
      const Vector psi = coherent_state_vector(spec_.s, config).amplitudes;
      const Vector c = eig_->eigenvectors.adjoint() * psi;
      double m = -std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < c.size(); ++k) {
        if (std::norm(c(k)) > 0.0) m = std::max(m, -beta_ * eig_->eigenvalues(k));
      }
      double acc = 0.0;
      for (Eigen::Index k = 0; k < c.size(); ++k) {
        acc += std::exp(-beta_ * eig_->eigenvalues(k) - m) * std::norm(c(k));
      }
      return -(m + std::log(acc)) / beta_;
    }
  }
  throw std::logic_error("effective_hamiltonian: unhandled model");
}

void EffectiveFieldModel::contract(const Vec3& n_other, int site, SiteForms& out) const {
  const int d = spec_.s.dim();
  const int dim = d * d;
  std::array<std::complex<double>, kMaxSiteDim> b{};
  site_amplitudes(spec_.s, n_other, b);
  out.count = static_cast<int>(ops_.size());
  out.d = d;
  out.r.resize(static_cast<std::size_t>(out.count * d * d));
  out.scratch.resize(static_cast<std::size_t>(dim * d));
  std::complex<double>* v = out.scratch.data();
  for (int j = 0; j < out.count; ++j) {
    const std::complex<double>* m = ops_[static_cast<std::size_t>(j)].data();
    std::complex<double>* r = out.r.data() + j * d * d;
    // v(i, q) = sum_t M(i, col(q, t)) b_t, with the other site's index summed
    for (int q = 0; q < d; ++q) {
      std::complex<double>* vq = v + q * dim;
      for (int i = 0; i < dim; ++i) vq[i] = 0.0;
      for (int t = 0; t < d; ++t) {
        const int col = site == 1 ? q * d + t : t * d + q;
        const std::complex<double>* mc = m + static_cast<std::ptrdiff_t>(col) * dim;
        const std::complex<double> bt = b[t];
        for (int i = 0; i < dim; ++i) vq[i] += mc[i] * bt;
      }
    }
    for (int p = 0; p < d; ++p) {
      for (int q = 0; q < d; ++q) {
        std::complex<double> acc = 0.0;
        for (int rr = 0; rr < d; ++rr) {
          const int row = site == 1 ? p * d + rr : rr * d + p;
          acc += std::conj(b[rr]) * v[q * dim + row];
        }
        r[p * d + q] = acc;
      }
    }
  }
}

double EffectiveFieldModel::combine(const double* m, const Vec3& n1, const Vec3& n2) const {
  switch (variant_.kind) {
    case ModelKind::SeriesExact: {
      if (!(m[0] > 0.0)) throw DomainError("series truncation lost positivity: 1 + F = " + fmt_double(m[0]));
      return -std::log(m[0]) / beta_;
    }
    case ModelKind::SeriesHighT: {
      const double f = m[0] - 1.0;
      double sum = 0.0;
      double fk = 1.0;
      for (int k = 1; k <= variant_.order; ++k) {
        fk *= f;
        sum += ((k % 2 == 1) ? 1.0 : -1.0) * fk / k;
      }
      return -sum / beta_;
    }
    case ModelKind::DifferenceExpansion: {
      const double s = spec_.s.value();
      const double h_cl =
          -spec_.J * s * s * n1.dot(n2) - spec_.constants.g_mu_B() * s * spec_.B.dot(n1 + n2);
      const double c = beta_ * (h_cl - shift_);
      // <(A - c)^k> from the moments <A^j>, A = beta (H - shift)
      std::array<double, kMaxOps + 1> mom{};
      mom[0] = 1.0;
      for (int j = 1; j <= variant_.order; ++j) mom[j] = m[j - 1];
      double sum = 0.0;
      double inv_fact = 1.0;
      for (int k = 0; k <= variant_.order; ++k) {
        if (k > 0) inv_fact /= k;
        double central = 0.0;
        double binom = 1.0;
        double cpow = 1.0;  // (-c)^(k-j), built from j = k downwards
        for (int j = k; j >= 0; --j) {
          central += binom * mom[j] * cpow;
          binom = binom * j / (k - j + 1);
          cpow *= -c;
        }
        sum += ((k % 2 == 0) ? 1.0 : -1.0) * inv_fact * central;
      }
      if (!(sum > 0.0)) throw DomainError("difference expansion lost positivity: sum = " + fmt_double(sum));
      return h_cl - std::log(sum) / beta_;
    }
    case ModelKind::EigenOverlap: {
      if (!(m[0] > 0.0)) throw DomainError("eigen-overlap weight underflowed: " + fmt_double(m[0]));
      return eig_->min_eigenvalue() - std::log(m[0]) / beta_;
    }
    case ModelKind::Classical:
      break;
  }
  throw std::logic_error("combine: classical model has no operator forms");
}

double EffectiveFieldModel::site_energy(const SiteForms& forms, const Vec3& n_site, const Vec3& n1,
                                        const Vec3& n2, int site) const {
  const int d = spec_.s.dim();
  std::array<std::complex<double>, kMaxSiteDim> a;
  site_amplitudes(spec_.s, n_site, a);
  std::array<double, kMaxOps> m;
  // Every operator is Hermitian, so a^dagger R a = sum_p R_pp |a_p|^2 + 2 Re sum_{p<q} conj(a_p) R_pq a_q.
  for (int j = 0; j < forms.count; ++j) {
    const std::complex<double>* r = forms.r.data() + j * d * d;
    double diag = 0.0;
    double off = 0.0;
    for (int p = 0; p < d; ++p) {
      const double ar = a[p].real();
      const double ai = a[p].imag();
      diag += r[p * d + p].real() * (ar * ar + ai * ai);
      double xr = 0.0;
      double xi = 0.0;
      for (int q = p + 1; q < d; ++q) {
        const std::complex<double> rq = r[p * d + q];
        xr += rq.real() * a[q].real() - rq.imag() * a[q].imag();
        xi += rq.real() * a[q].imag() + rq.imag() * a[q].real();
      }
      off += ar * xr + ai * xi;
    }
    m[j] = diag + 2.0 * off;
  }
  return site == 1 ? combine(m.data(), n_site, n2) : combine(m.data(), n1, n_site);
}

double EffectiveFieldModel::fast_energy(const CoherentConfiguration& config) const {
  if (variant_.kind == ModelKind::Classical) return classical_energy(spec_, config);
  thread_local SiteForms forms;
  contract(config.n2.vec(), 1, forms);
  return site_energy(forms, config.n1.vec(), config.n1.vec(), config.n2.vec(), 1);
}

FieldSample EffectiveFieldModel::effective_field(const CoherentConfiguration& config) const {
  const Vec3& n1 = config.n1.vec();
  const Vec3& n2 = config.n2.vec();
  const double mu_s = spec_.mu_s();
  FieldSample out;
  if (variant_.kind == ModelKind::Classical) {
    const double s = spec_.s.value();
    const double scale = spec_.J * s / spec_.constants.g_mu_B();
    out.b1 = scale * n2 + spec_.B;
    out.b2 = scale * n1 + spec_.B;
    out.energy = classical_energy(spec_, config);
    return out;
  }

  thread_local SiteForms forms;
  const double h = kFieldStep;
  constexpr std::array<double, 4> offsets{-2.0, -1.0, 1.0, 2.0};
  constexpr std::array<double, 4> weights{1.0, -8.0, 8.0, -1.0};
  for (int site = 1; site <= 2; ++site) {
    const Vec3& self = site == 1 ? n1 : n2;
    contract(site == 1 ? n2 : n1, site, forms);
    if (site == 1) out.energy = site_energy(forms, n1, n1, n2, 1);
    Vec3 grad;
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        Vec3 p = self;
        p(c) += offsets[k] * h;
        p.normalize();
        acc += weights[k] * site_energy(forms, p, n1, n2, site);
      }
      grad(c) = acc / (12.0 * h);
    }
    (site == 1 ? out.b1 : out.b2) = -grad / mu_s;
  }
  return out;
}

}  // namespace pisd
