#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "pisd/quantum_core.hpp"

namespace pisd {

// Largest spin supported by the coherent-state and effective-field code.
inline constexpr int kMaxTwoS = 10;
inline constexpr int kMaxSiteDim = kMaxTwoS + 1;

// Unit vector on the Bloch sphere.
class BlochVector {
 public:
  BlochVector() : n_(0.0, 0.0, 1.0) {}
  // Throws std::invalid_argument unless |n| = 1 within 1e-9.
  explicit BlochVector(const Vec3& n);
  static BlochVector normalized(const Vec3& v);
  static BlochVector from_angles(double theta, double phi);

  const Vec3& vec() const noexcept { return n_; }
  double x() const noexcept { return n_.x(); }
  double y() const noexcept { return n_.y(); }
  double z() const noexcept { return n_.z(); }

 private:
  Vec3 n_;
};

struct StereoCoordinate {
  std::complex<double> z;
};

struct CoherentConfiguration {
  BlochVector n1;
  BlochVector n2;
};

// Normalised product coherent state over the basis index p1 * (2s+1) + p2.
struct CoherentStateVector {
  Vector amplitudes;
};

// Raised when a Bloch vector sits at (or numerically next to) the south pole,
// where the stereographic coordinate diverges.
class PoleSingularity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

BlochVector stereo_to_bloch(StereoCoordinate z);
StereoCoordinate bloch_to_stereo(const BlochVector& n);

// Single-site amplitudes sqrt(C(2s,p)) cos^(2s-p)(theta/2) sin^p(theta/2) e^(i p phi),
// evaluated from the Cartesian components of a unit vector. `out` needs 2s+1 slots.
void site_amplitudes(Spin s, const Vec3& n, std::span<std::complex<double>> out);

CoherentStateVector coherent_state_vector(Spin s, const CoherentConfiguration& config);

enum class SiteOperator { Plus, Minus, Z, X, Y };

struct SiteOp {
  SiteOperator op;
  int site;  // 1 or 2
};

// Parses labels such as "S+1", "S-2", "Sz1", "Sx2", "Sy1".
SiteOp parse_site_op(std::string_view label);

inline constexpr std::size_t kMaxProductLength = 6;

// <z1 z2| A_1 A_2 ... A_k |z1 z2> in units of hbar^k, by dense application of
// the operators to the coherent state vector (rightmost first).
std::complex<double> brute_moment(std::span<const SiteOp> product, Spin s,
                                  const CoherentConfiguration& config);

// Closed-form single-site moments of the coherent state |z>.
enum class MomentKind {
  Sz,
  SzSz,
  SplusSplus,
  SminusSminus,
  SplusSminus,
  SplusSz,
  SminusSz,
  SzSzSz,
  SplusSminusSz,
  SminusSminusSz,
  SplusSplusSz,
  SplusSzSz,
  SminusSzSz,
  SplusSplusSminus,
  SplusSminusSminus,
  SplusPower,
  SminusPower,
};

MomentKind parse_moment_kind(std::string_view name);
std::string_view moment_kind_name(MomentKind kind);
std::span<const MomentKind> all_moment_kinds();

// Operator word for a kind acting on one site (SplusPower/SminusPower repeat `power` times).
std::vector<SiteOp> moment_operators(MomentKind kind, int site, int power = 1);

// Value in units of hbar^k, k the operator count. `power` is only used by
// SplusPower and SminusPower.
std::complex<double> analytic_moment(MomentKind kind, Spin s, StereoCoordinate z, int power = 1);

}  // namespace pisd
