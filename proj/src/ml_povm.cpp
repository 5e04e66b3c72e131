#include "polarimetry/ml_povm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polarimetry {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Below this nbar the Poisson/thermal closed forms lose digits to
// cancellation; the truncated series is exact to roundoff there.
constexpr double kSmallNbar = 0.1;

void check_unit_interval(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::invalid_argument("fidelity argument must lie in [0, 1]");
  }
}

void check_epsilon(double eps) {
  if (!(eps >= 0.0 && eps <= std::numbers::pi)) {
    throw std::invalid_argument("epsilon must lie in [0, pi]");
  }
}

}  // namespace

LikelihoodModel::LikelihoodModel(const PhotonDistribution& dist) : dist_(dist) {}

double LikelihoodModel::likelihood(const PolVec& r, const PolVec& r0) const {
  return likelihood_at(fidelity(r, r0));
}

double LikelihoodModel::likelihood_at(double u) const {
  check_unit_interval(u);
  const double nbar = dist_.param();
  switch (dist_.kind()) {
    case PhotonDistribution::Kind::fock: {
      const int n = static_cast<int>(nbar);
      return (n + 1) * std::pow(u, n) / kFourPi;
    }
    case PhotonDistribution::Kind::poisson:
      return std::exp(-nbar * (1.0 - u)) * (1.0 + nbar * u) / kFourPi;
    case PhotonDistribution::Kind::thermal: {
      const double d = 1.0 - nbar / (1.0 + nbar) * u;
      return 1.0 / (kFourPi * (1.0 + nbar) * d * d);
    }
    case PhotonDistribution::Kind::custom:
      return likelihood_series_at(u);
  }
  return 0.0;
}

double LikelihoodModel::likelihood_series_at(double u) const {
  check_unit_interval(u);
  double sum = 0.0;
  double power = 1.0;  // u^n
  const int n_max = dist_.truncation_index();
  for (int n = 0; n <= n_max; ++n) {
    sum += (n + 1) * dist_.pmf(n) * power;
    power *= u;
  }
  return sum / kFourPi;
}

double LikelihoodModel::fidelity_pdf(double u) const { return kFourPi * likelihood_at(u); }

double LikelihoodModel::fidelity_cdf(double u) const {
  check_unit_interval(u);
  double sum = 0.0;
  double power = u;  // u^{n+1}
  const int n_max = dist_.truncation_index();
  for (int n = 0; n <= n_max; ++n) {
    sum += dist_.pmf(n) * power;
    power *= u;
  }
  return sum;
}

PolVec LikelihoodModel::sample_outcome(const PolVec& r0, Rng& rng) const {
  const int n = dist_.sample(rng);
  // Conditional on n, the fidelity has density (n+1) u^n; the inverse CDF
  // of that Beta(n+1, 1) law is U^{1/(n+1)}.
  const double u = std::pow(uniform01(rng), 1.0 / (n + 1));
  const double cos_gamma = 2.0 * u - 1.0;
  const double sin_gamma = std::sqrt(std::max(0.0, 1.0 - cos_gamma * cos_gamma));
  const double az = 2.0 * std::numbers::pi * uniform01(rng);
  const auto [e1, e2] = orthonormal_frame(r0.cartesian());
  const Vec3 out = (sin_gamma * std::cos(az)) * e1 + (sin_gamma * std::sin(az)) * e2 +
                   cos_gamma * r0.cartesian();
  return PolVec::from_cartesian(out);
}

double LikelihoodModel::success_probability(double epsilon) const {
  check_epsilon(epsilon);
  const double cos_eps = std::cos(epsilon);
  const double c = 0.5 * (1.0 + cos_eps);
  const double nbar = dist_.param();
  switch (dist_.kind()) {
    case PhotonDistribution::Kind::fock:
      return 1.0 - std::pow(c, static_cast<int>(nbar) + 1);
    case PhotonDistribution::Kind::poisson:
      return 1.0 - c * std::exp(-0.5 * nbar * (1.0 - cos_eps));
    case PhotonDistribution::Kind::thermal:
      return 1.0 - (1.0 + cos_eps) / (2.0 + nbar * (1.0 - cos_eps));
    case PhotonDistribution::Kind::custom:
      return success_probability_series(epsilon);
  }
  return 0.0;
}

double LikelihoodModel::success_probability_series(double epsilon) const {
  check_epsilon(epsilon);
  const double c = 0.5 * (1.0 + std::cos(epsilon));
  double sum = 0.0;
  double power = c;  // c^{n+1}
  const int n_max = dist_.truncation_index();
  for (int n = 0; n <= n_max; ++n) {
    sum += dist_.pmf(n) * power;
    power *= c;
  }
  return 1.0 - sum;
}

std::optional<double> LikelihoodModel::success_probability_small_eps(double epsilon) const {
  check_epsilon(epsilon);
  const double e2 = epsilon * epsilon;
  const double nbar = dist_.param();
  switch (dist_.kind()) {
    case PhotonDistribution::Kind::fock:
      return 1.0 - std::exp(-0.25 * e2 * (static_cast<int>(nbar) + 1));
    case PhotonDistribution::Kind::poisson:
      return 1.0 - std::exp(-0.25 * e2 * (nbar + 1.0));
    case PhotonDistribution::Kind::thermal:
      return 1.0 - (4.0 - e2) / (4.0 + e2 * nbar);
    case PhotonDistribution::Kind::custom:
      return std::nullopt;
  }
  return std::nullopt;
}

double LikelihoodModel::mean_fidelity() const {
  const double nbar = dist_.param();
  switch (dist_.kind()) {
    case PhotonDistribution::Kind::fock: {
      const int n = static_cast<int>(nbar);
      return (n + 1.0) / (n + 2.0);
    }
    case PhotonDistribution::Kind::poisson:
      if (nbar < kSmallNbar) return mean_fidelity_series();
      return (nbar * nbar - nbar - std::expm1(-nbar)) / (nbar * nbar);
    case PhotonDistribution::Kind::thermal:
      if (nbar < kSmallNbar) return mean_fidelity_series();
      return (1.0 + nbar) * (nbar - std::log1p(nbar)) / (nbar * nbar);
    case PhotonDistribution::Kind::custom:
      return mean_fidelity_series();
  }
  return 0.0;
}

double LikelihoodModel::mean_fidelity_series() const {
  double sum = 0.0;
  const int n_max = dist_.truncation_index();
  for (int n = 0; n <= n_max; ++n) sum += (n + 1.0) / (n + 2.0) * dist_.pmf(n);
  return sum;
}

std::optional<double> LikelihoodModel::mean_fidelity_large_nbar() const {
  const double nbar = dist_.param();
  switch (dist_.kind()) {
    case PhotonDistribution::Kind::poisson:
      return 1.0 - 1.0 / nbar;
    case PhotonDistribution::Kind::thermal:
      return 1.0 - std::log1p(nbar) / nbar;
    default:
      return std::nullopt;
  }
}

double LikelihoodModel::fidelity_variance() const {
  const double nbar = dist_.param();
  switch (dist_.kind()) {
    case PhotonDistribution::Kind::fock: {
      const int n = static_cast<int>(nbar);
      return (n + 1.0) / ((n + 3.0) * (n + 2.0) * (n + 2.0));
    }
    case PhotonDistribution::Kind::poisson: {
      if (nbar < kSmallNbar) return fidelity_variance_series();
      const double e = std::exp(-nbar);
      const double num = (nbar * nbar - 2.0 * nbar - 1.0) +
                         2.0 * e * (1.0 + nbar + nbar * nbar) - e * e;
      return num / (nbar * nbar * nbar * nbar);
    }
    case PhotonDistribution::Kind::thermal: {
      if (nbar < kSmallNbar) return fidelity_variance_series();
      const double log1_nbar = std::log1p(nbar);
      const double num =
          (1.0 + nbar) * (nbar * nbar - (1.0 + nbar) * log1_nbar * log1_nbar);
      return num / (nbar * nbar * nbar * nbar);
    }
    case PhotonDistribution::Kind::custom:
      return fidelity_variance_series();
  }
  return 0.0;
}

double LikelihoodModel::fidelity_variance_series() const {
  double second = 0.0;
  const int n_max = dist_.truncation_index();
  for (int n = 0; n <= n_max; ++n) second += (n + 1.0) / (n + 3.0) * dist_.pmf(n);
  const double mean = mean_fidelity_series();
  return second - mean * mean;
}

}  // namespace polarimetry
