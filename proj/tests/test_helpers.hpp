// Oracles and statistical helpers shared by the test suites. Everything in
// here is independent of the library code paths it is used to check.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "polarimetry/bloch.hpp"
#include "polarimetry/rng.hpp"

namespace test_util {

using Mat3x3 = std::array<std::array<double, 3>, 3>;

inline polarimetry::Vec3 apply(const Mat3x3& rot, const polarimetry::Vec3& v) {
  return {rot[0][0] * v.x + rot[0][1] * v.y + rot[0][2] * v.z,
          rot[1][0] * v.x + rot[1][1] * v.y + rot[1][2] * v.z,
          rot[2][0] * v.x + rot[2][1] * v.y + rot[2][2] * v.z};
}

/// Uniformly random rotation matrix, via a uniform unit quaternion.
inline Mat3x3 random_rotation(polarimetry::Rng& rng) {
  using polarimetry::uniform01;
  const double u1 = uniform01(rng);
  const double u2 = 2.0 * std::numbers::pi * uniform01(rng);
  const double u3 = 2.0 * std::numbers::pi * uniform01(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double qx = a * std::sin(u2), qy = a * std::cos(u2);
  const double qz = b * std::sin(u3), qw = b * std::cos(u3);
  Mat3x3 rot;
  rot[0] = {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)};
  rot[1] = {2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)};
  rot[2] = {2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)};
  return rot;
}

/// Double factorial with the (-1)!! = 1 convention.
inline double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k >= 2; k -= 2) r *= k;
  return r;
}

/// Closed-form sphere moment: integral of x^a y^b z^c over the unit sphere
/// surface. Zero when any exponent is odd, otherwise
/// 4*pi (a-1)!! (b-1)!! (c-1)!! / (a+b+c+1)!!.
inline double sphere_moment(int a, int b, int c) {
  if (a % 2 != 0 || b % 2 != 0 || c % 2 != 0) return 0.0;
  return 4.0 * std::numbers::pi * double_factorial(a - 1) * double_factorial(b - 1) *
         double_factorial(c - 1) / double_factorial(a + b + c + 1);
}

/// Upper-tail chi-squared quantile via the Wilson-Hilferty approximation;
/// z is the standard normal quantile of the same tail (3.090232 for 0.001).
inline double chi2_critical(int df, double z = 3.090232306167813) {
  const double t = 2.0 / (9.0 * df);
  const double base = 1.0 - t + z * std::sqrt(t);
  return df * base * base * base;
}

/// Pearson chi-squared statistic against expected probabilities; bins with
/// expected count below 5 are pooled into the previous bin. Returns
/// {statistic, degrees of freedom}.
inline std::pair<double, int> chi2_statistic(const std::vector<long>& counts,
                                             const std::vector<double>& probs, long total) {
  std::vector<double> expected;
  std::vector<double> observed;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = probs[i] * total;
    if (!expected.empty() && (e < 5.0 || expected.back() < 5.0)) {
      expected.back() += e;
      observed.back() += counts[i];
    } else {
      expected.push_back(e);
      observed.push_back(counts[i]);
    }
  }
  double stat = 0.0;
  int bins = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
    ++bins;
  }
  return {stat, std::max(1, bins - 1)};
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - (i + 1) / n));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Asymptotic KS critical value at significance 0.001.
inline double ks_critical_one_sample(std::size_t n) {
  return 1.9494746035204051 / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::size_t n, std::size_t m) {
  return 1.9494746035204051 *
         std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

}  // namespace test_util
