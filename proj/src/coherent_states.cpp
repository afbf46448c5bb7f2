#include "pisd/coherent_states.hpp"

#include <array>
#include <cmath>
#include <string>

namespace pisd {

BlochVector::BlochVector(const Vec3& n) : n_(n) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("BlochVector: vector must have unit norm");
  }
}

BlochVector BlochVector::normalized(const Vec3& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("BlochVector: cannot normalise a zero or non-finite vector");
  }
  BlochVector out;
  out.n_ = v / norm;
  return out;
}

BlochVector BlochVector::from_angles(double theta, double phi) {
  return normalized(Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                         std::cos(theta)));
}

BlochVector stereo_to_bloch(StereoCoordinate zc) {
  const std::complex<double> z = zc.z;
  const double a = std::norm(z);
  const double q = 1.0 + a;
  return BlochVector::normalized(Vec3(2.0 * z.real() / q, 2.0 * z.imag() / q, (1.0 - a) / q));
}

StereoCoordinate bloch_to_stereo(const BlochVector& n) {
  if (n.z() <= -1.0 + 1e-12) {
    throw PoleSingularity("bloch_to_stereo: south pole has no finite stereographic coordinate");
  }
  return StereoCoordinate{std::complex<double>(n.x(), n.y()) / (1.0 + n.z())};
}

namespace {

// sqrt(C(n, k)) for n <= kMaxTwoS
const std::array<std::array<double, kMaxSiteDim>, kMaxSiteDim>& sqrt_binomials() {
  static const auto table = [] {
    std::array<std::array<double, kMaxSiteDim>, kMaxSiteDim> t{};
    for (int n = 0; n <= kMaxTwoS; ++n) {
      double c = 1.0;
      for (int k = 0; k <= n; ++k) {
        t[n][k] = std::sqrt(c);
        c = c * (n - k) / (k + 1);
      }
    }
    return t;
  }();
  return table;
}

void check_spin_cap(Spin s) {
  if (s.two_s() > kMaxTwoS) {
    throw std::invalid_argument("coherent states: spin exceeds implementation cap s <= " +
                                std::to_string(kMaxTwoS / 2));
  }
}

}  // namespace

void site_amplitudes(Spin s, const Vec3& n, std::span<std::complex<double>> out) {
  const int two_s = s.two_s();
  if (two_s > kMaxTwoS || out.size() < static_cast<std::size_t>(two_s + 1)) {
    throw std::invalid_argument("site_amplitudes: spin above cap or output too short");
  }
  const double nz = std::clamp(n.z(), -1.0, 1.0);
  const double rho = std::sqrt(n.x() * n.x() + n.y() * n.y());
  // cos(theta/2) and sin(theta/2) e^{i phi}; the branch keeps both accurate near either pole.
  double c;
  std::complex<double> se;
  if (nz >= 0.0) {
    c = std::sqrt(0.5 * (1.0 + nz));
    se = std::complex<double>(n.x(), n.y()) / (2.0 * c);
  } else {
    const double sh = std::sqrt(0.5 * (1.0 - nz));
    c = rho / (2.0 * sh);
    se = rho > 0.0 ? std::complex<double>(n.x(), n.y()) * (sh / rho) : std::complex<double>(sh, 0.0);
  }
  const auto& binom = sqrt_binomials()[two_s];
  std::array<double, kMaxSiteDim> cpow;
  cpow[0] = 1.0;
  for (int p = 1; p <= two_s; ++p) cpow[p] = cpow[p - 1] * c;
  std::complex<double> spow(1.0, 0.0);
  for (int p = 0; p <= two_s; ++p) {
    out[p] = (binom[p] * cpow[two_s - p]) * spow;
    spow *= se;
  }
}

CoherentStateVector coherent_state_vector(Spin s, const CoherentConfiguration& config) {
  check_spin_cap(s);
  const int d = s.dim();
  std::array<std::complex<double>, kMaxSiteDim> a1{}, a2{};
  site_amplitudes(s, config.n1.vec(), a1);
  site_amplitudes(s, config.n2.vec(), a2);
  CoherentStateVector out{Vector(d * d)};
  for (int p1 = 0; p1 < d; ++p1) {
    for (int p2 = 0; p2 < d; ++p2) out.amplitudes(p1 * d + p2) = a1[p1] * a2[p2];
  }
  return out;
}

SiteOp parse_site_op(std::string_view label) {
  if (label.size() != 3 || label[0] != 'S') {
    throw std::invalid_argument("parse_site_op: expected a label like S+1, got '" + std::string(label) + "'");
  }
  SiteOp op{};
  switch (label[1]) {
    case '+': op.op = SiteOperator::Plus; break;
    case '-': op.op = SiteOperator::Minus; break;
    case 'z': op.op = SiteOperator::Z; break;
    case 'x': op.op = SiteOperator::X; break;
    case 'y': op.op = SiteOperator::Y; break;
    default: throw std::invalid_argument("parse_site_op: unknown operator in '" + std::string(label) + "'");
  }
  if (label[2] != '1' && label[2] != '2') {
    throw std::invalid_argument("parse_site_op: site must be 1 or 2 in '" + std::string(label) + "'");
  }
  op.site = label[2] - '0';
  return op;
}

std::complex<double> brute_moment(std::span<const SiteOp> product, Spin s,
                                  const CoherentConfiguration& config) {
  if (product.empty()) throw std::invalid_argument("brute_moment: empty operator product");
  if (product.size() > kMaxProductLength) {
    throw std::invalid_argument("brute_moment: operator product longer than 6");
  }
  check_spin_cap(s);
  const auto m = build_spin_matrices(s);
  const Matrix ops[] = {m.splus(), m.sminus(), m.sz, m.sx, m.sy};
  const int d = s.dim();

  const Vector psi = coherent_state_vector(s, config).amplitudes;
  Vector w = psi;
  for (auto it = product.rbegin(); it != product.rend(); ++it) {
    if (it->site != 1 && it->site != 2) throw std::invalid_argument("brute_moment: site must be 1 or 2");
    const Matrix& a = ops[static_cast<int>(it->op)];
    Vector next = Vector::Zero(d * d);
    for (int p1 = 0; p1 < d; ++p1) {
      for (int p2 = 0; p2 < d; ++p2) {
        std::complex<double> acc = 0.0;
        if (it->site == 1) {
          for (int q = 0; q < d; ++q) acc += a(p1, q) * w(q * d + p2);
        } else {
          for (int q = 0; q < d; ++q) acc += a(p2, q) * w(p1 * d + q);
        }
        next(p1 * d + p2) = acc;
      }
    }
    w = std::move(next);
  }
  return psi.dot(w);  // conjugates psi
}

namespace {

struct KindInfo {
  MomentKind kind;
  std::string_view name;
  std::array<SiteOperator, 3> word;
  int length;
};

constexpr std::array<KindInfo, 17> kKinds{{
    {MomentKind::Sz, "Sz", {SiteOperator::Z}, 1},
    {MomentKind::SzSz, "SzSz", {SiteOperator::Z, SiteOperator::Z}, 2},
    {MomentKind::SplusSplus, "S+S+", {SiteOperator::Plus, SiteOperator::Plus}, 2},
    {MomentKind::SminusSminus, "S-S-", {SiteOperator::Minus, SiteOperator::Minus}, 2},
    {MomentKind::SplusSminus, "S+S-", {SiteOperator::Plus, SiteOperator::Minus}, 2},
    {MomentKind::SplusSz, "S+Sz", {SiteOperator::Plus, SiteOperator::Z}, 2},
    {MomentKind::SminusSz, "S-Sz", {SiteOperator::Minus, SiteOperator::Z}, 2},
    {MomentKind::SzSzSz, "SzSzSz", {SiteOperator::Z, SiteOperator::Z, SiteOperator::Z}, 3},
    {MomentKind::SplusSminusSz, "S+S-Sz", {SiteOperator::Plus, SiteOperator::Minus, SiteOperator::Z}, 3},
    {MomentKind::SminusSminusSz, "S-S-Sz", {SiteOperator::Minus, SiteOperator::Minus, SiteOperator::Z}, 3},
    {MomentKind::SplusSplusSz, "S+S+Sz", {SiteOperator::Plus, SiteOperator::Plus, SiteOperator::Z}, 3},
    {MomentKind::SplusSzSz, "S+SzSz", {SiteOperator::Plus, SiteOperator::Z, SiteOperator::Z}, 3},
    {MomentKind::SminusSzSz, "S-SzSz", {SiteOperator::Minus, SiteOperator::Z, SiteOperator::Z}, 3},
    {MomentKind::SplusSplusSminus, "S+S+S-", {SiteOperator::Plus, SiteOperator::Plus, SiteOperator::Minus}, 3},
    {MomentKind::SplusSminusSminus, "S+S-S-", {SiteOperator::Plus, SiteOperator::Minus, SiteOperator::Minus}, 3},
    {MomentKind::SplusPower, "S+^N", {SiteOperator::Plus}, 1},
    {MomentKind::SminusPower, "S-^N", {SiteOperator::Minus}, 1},
}};

constexpr std::array<MomentKind, 17> kAllKinds = [] {
  std::array<MomentKind, 17> out{};
  for (std::size_t i = 0; i < kKinds.size(); ++i) out[i] = kKinds[i].kind;
  return out;
}();

const KindInfo& info(MomentKind kind) { return kKinds[static_cast<std::size_t>(kind)]; }

double falling_factorial(int n, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= n - i;
  return out;
}

}  // namespace

MomentKind parse_moment_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw std::invalid_argument("unknown moment kind '" + std::string(name) + "'");
}

std::string_view moment_kind_name(MomentKind kind) { return info(kind).name; }

std::span<const MomentKind> all_moment_kinds() { return kAllKinds; }

std::vector<SiteOp> moment_operators(MomentKind kind, int site, int power) {
  const auto& k = info(kind);
  std::vector<SiteOp> out;
  if (kind == MomentKind::SplusPower || kind == MomentKind::SminusPower) {
    if (power < 1) throw std::invalid_argument("moment_operators: power must be >= 1");
    out.assign(static_cast<std::size_t>(power), SiteOp{k.word[0], site});
    return out;
  }
  for (int i = 0; i < k.length; ++i) out.push_back(SiteOp{k.word[i], site});
  return out;
}

std::complex<double> analytic_moment(MomentKind kind, Spin spin, StereoCoordinate zc, int power) {
  const double s = spin.value();
  const std::complex<double> z = zc.z;
  const std::complex<double> zb = std::conj(z);
  const double a = std::norm(z);
  const double q = 1.0 + a;
  const double q2 = q * q;
  const double q3 = q2 * q;

  switch (kind) {
    case MomentKind::Sz:
      return s * (1.0 - a) / q;
    case MomentKind::SzSz:
      return s * s * (std::pow((1.0 - a) / q, 2) + 2.0 / s * a / q2);
    case MomentKind::SplusSplus:
      return s * s * (4.0 - 2.0 / s) * z * z / q2;
    case MomentKind::SminusSminus:
      return s * s * (4.0 - 2.0 / s) * zb * zb / q2;
    case MomentKind::SplusSminus:
      return s * s * (2.0 * a + 1.0 / s) * 2.0 / q2;
    case MomentKind::SminusSz:
      return s * s * (1.0 - a + a / s) * 2.0 * zb / q2;
    case MomentKind::SplusSz:
      return s * s * (1.0 - a - 1.0 / s) * 2.0 * z / q2;
    case MomentKind::SzSzSz:
      return -s * (a - 1.0) * (s * s * (a * a + 1.0) - 2.0 * ((s - 3.0) * s + 1.0) * a) / q3;
    case MomentKind::SplusSminusSz:
      return 2.0 * s * (-2.0 * (s - 1.0) * s * a * a + (s * (2.0 * s - 3.0) + 2.0) * a + s) / q3;
    case MomentKind::SminusSminusSz:
      return -2.0 * s * (2.0 * s - 1.0) * zb * zb * ((s - 2.0) * a - s) / q3;
    case MomentKind::SplusSplusSz:
      return -2.0 * s * (2.0 * s - 1.0) * z * z * (s * a - s + 2.0) / q3;
    case MomentKind::SplusSzSz:
      return 2.0 * s * z * (s * s * a * a + (-2.0 * (s - 2.0) * s - 1.0) * a + (s - 1.0) * (s - 1.0)) / q3;
    case MomentKind::SminusSzSz:
      return 2.0 * s * zb * ((s - 1.0) * (s - 1.0) * a * a + (-2.0 * (s - 2.0) * s - 1.0) * a + s * s) / q3;
    case MomentKind::SplusSplusSminus:
      return 4.0 * s * (2.0 * s - 1.0) * z * (s * a + 1.0) / q3;
    case MomentKind::SplusSminusSminus:
      return 4.0 * s * (2.0 * s - 1.0) * zb * (s * a + 1.0) / q3;
    case MomentKind::SplusPower:
    case MomentKind::SminusPower: {
      if (power < 1) throw std::invalid_argument("analytic_moment: power must be >= 1");
      if (power > spin.two_s()) return 0.0;
      const std::complex<double> base = (kind == MomentKind::SplusPower ? z : zb) / q;
      return falling_factorial(spin.two_s(), power) * std::pow(base, power);
    }
  }
  throw std::invalid_argument("analytic_moment: unknown moment kind");
}

}  // namespace pisd
