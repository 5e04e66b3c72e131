#include "polarimetry/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polarimetry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

/// Legendre polynomial P_n and its derivative at x, by upward recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

/// n-point Gauss-Legendre nodes and weights on [-1, 1]. Nodes are found by
/// Newton iteration and mirrored so the rule is exactly symmetric.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, d] = legendre(n, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        const auto [p2, d2] = legendre(n, x);
        dp = d2;
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = x;
    weights[i] = w;
    nodes[n - 1 - i] = -x;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[half - 1] = 0.0;
}

}  // namespace

PolVec::PolVec(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw std::invalid_argument("PolVec: non-finite angle");
  }
  if (theta < -1e-9 || theta > std::numbers::pi + 1e-9) {
    throw std::invalid_argument("PolVec: theta outside [0, pi]");
  }
  theta_ = std::clamp(theta, 0.0, std::numbers::pi);
  phi_ = wrap_angle(phi);
  const double s = std::sin(theta_);
  cart_ = {s * std::cos(phi_), s * std::sin(phi_), std::cos(theta_)};
}

PolVec PolVec::from_cartesian(const Vec3& v) {
  const double n = norm(v);
  if (!std::isfinite(n) || n < 1e-300) {
    throw std::invalid_argument("PolVec: cannot normalize a zero vector");
  }
  const double ct = std::clamp(v.z / n, -1.0, 1.0);
  const double theta = std::acos(ct);
  const double phi = (v.x == 0.0 && v.y == 0.0) ? 0.0 : std::atan2(v.y, v.x);
  return PolVec(theta, phi);
}

double fidelity(const PolVec& r, const PolVec& r0) {
  return std::clamp(0.5 * (1.0 + dot(r.cartesian(), r0.cartesian())), 0.0, 1.0);
}

PolVec antipode(const PolVec& r) {
  return PolVec(std::numbers::pi - r.theta(), r.phi() + std::numbers::pi);
}

PolVec uniform_sample(Rng& rng) {
  const double ct = 2.0 * uniform01(rng) - 1.0;
  const double phi = kTwoPi * uniform01(rng);
  return PolVec(std::acos(std::clamp(ct, -1.0, 1.0)), phi);
}

SphericalCap::SphericalCap(const PolVec& c, double eps) : center(c), half_angle(eps) {
  if (!std::isfinite(eps) || eps < 0.0 || eps > std::numbers::pi) {
    throw std::invalid_argument("SphericalCap: half angle outside [0, pi]");
  }
}

bool SphericalCap::contains(const PolVec& r) const {
  return dot(r.cartesian(), center.cartesian()) >= std::cos(half_angle);
}

SphereQuadrature build_quadrature(int degree) {
  if (degree < 0) throw std::invalid_argument("build_quadrature: negative degree");
  if (degree > max_quadrature_degree()) {
    throw std::invalid_argument("build_quadrature: degree above implementation cap");
  }
  const int n_polar = (degree + 2) / 2;  // ceil((degree + 1)/2)
  const int n_azimuth = degree + 1;

  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(n_polar, gl_nodes, gl_weights);

  SphereQuadrature quad;
  quad.degree = degree;
  quad.nodes.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
  quad.weights.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
  const double dphi = kTwoPi / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double theta = std::acos(std::clamp(gl_nodes[i], -1.0, 1.0));
    const double w = gl_weights[i] * dphi;
    for (int j = 0; j < n_azimuth; ++j) {
      quad.nodes.emplace_back(theta, j * dphi);
      quad.weights.push_back(w);
    }
  }
  return quad;
}

std::pair<Vec3, Vec3> orthonormal_frame(const Vec3& w) {
  // Seed with the coordinate axis least aligned with w.
  Vec3 seed{1.0, 0.0, 0.0};
  const double ax = std::abs(w.x), ay = std::abs(w.y), az = std::abs(w.z);
  if (ay <= ax && ay <= az) {
    seed = {0.0, 1.0, 0.0};
  } else if (az <= ax && az <= ay) {
    seed = {0.0, 0.0, 1.0};
  }
  Vec3 e1 = cross(seed, w);
  e1 = (1.0 / norm(e1)) * e1;
  const Vec3 e2 = cross(w, e1);
  return {e1, e2};
}

}  // namespace polarimetry
