#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polarimetry/rng.hpp"

namespace polarimetry {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// A pure polarization state, i.e. a point on the surface of the Bloch
/// sphere. The polar angle theta is measured from the north pole, which
/// designates the horizontal polarization; the azimuth phi is measured from
/// the x-axis. The spherical angles and the unit cartesian vector are kept
/// consistent at construction and never change afterwards.
class PolVec {
 public:
  /// theta must lie in [0, pi] (a small rounding slack is clamped);
  /// phi is wrapped into [0, 2*pi). Non-finite inputs are rejected.
  PolVec(double theta, double phi);

  /// Builds from an arbitrary nonzero vector. The input is normalized and
  /// cos(theta) is clamped to [-1, 1] to absorb rounding.
  static PolVec from_cartesian(const Vec3& v);

  double theta() const { return theta_; }
  double phi() const { return phi_; }
  const Vec3& cartesian() const { return cart_; }

 private:
  double theta_;
  double phi_;
  Vec3 cart_;
};

/// Fidelity (1 + r.r0)/2 between two pure polarizations: 1 for identical
/// states, 0 for antipodal (orthogonal) ones. Symmetric in its arguments.
double fidelity(const PolVec& r, const PolVec& r0);

/// Diametrically opposite point; carries the orthogonal polarization.
PolVec antipode(const PolVec& r);

/// Uniform draw from the sphere surface: cos(theta) uniform on [-1, 1]
/// (first engine draw), phi uniform on [0, 2*pi) (second draw).
PolVec uniform_sample(Rng& rng);

/// Spherical cap of angular radius half_angle around center. A point r is a
/// member iff its angle to the center is at most half_angle, equivalently
/// iff fidelity(r, center) >= (1 + cos(half_angle))/2.
struct SphericalCap {
  PolVec center;
  double half_angle;

  SphericalCap(const PolVec& c, double eps);
  bool contains(const PolVec& r) const;
  /// Cap area divided by the full sphere area: (1 - cos(half_angle))/2.
  double area_fraction() const { return 0.5 * (1.0 - std::cos(half_angle)); }
};

/// Nodes and weights integrating functions over the sphere surface. The
/// weights include the measure, so integrating the constant 1 gives 4*pi.
/// Every monomial x^a y^b z^c with a + b + c <= degree is integrated
/// exactly.
struct SphereQuadrature {
  std::vector<PolVec> nodes;
  std::vector<double> weights;
  int degree = 0;
};

constexpr int max_quadrature_degree() { return 2048; }

/// Product rule: Gauss-Legendre nodes in cos(theta), ceil((degree+1)/2) of
/// them, times degree+1 equally spaced and equally weighted azimuths.
/// Throws std::invalid_argument for degree < 0 or above
/// max_quadrature_degree().
SphereQuadrature build_quadrature(int degree);

/// Deterministic right-handed orthonormal frame (e1, e2) completing the
/// unit vector w, with e1 x e2 = w.
std::pair<Vec3, Vec3> orthonormal_frame(const Vec3& w);

}  // namespace polarimetry
