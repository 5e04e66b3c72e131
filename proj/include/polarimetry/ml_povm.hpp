#pragma once

#include <optional>

#include "polarimetry/bloch.hpp"
#include "polarimetry/photon_stats.hpp"

namespace polarimetry {

/// Figures of merit of the continuous maximum-likelihood estimator for a
/// given photon-number distribution: outcome likelihood, success
/// probability within a spherical cap, mean fidelity and fidelity variance,
/// plus exact sampling of estimator outcomes.
///
/// Fock, Poisson and thermal statistics use closed forms; custom
/// distributions use the series truncated at the distribution's truncation
/// index. The *_series variants always evaluate the truncated series and
/// exist as the second route of the closed-form/series consistency checks.
/// Approximation variants (small epsilon, large nbar) are separate, flagged
/// outputs and are never substituted for the exact forms.
class LikelihoodModel {
 public:
  explicit LikelihoodModel(const PhotonDistribution& dist);

  const PhotonDistribution& distribution() const { return dist_; }
  int n_max() const { return dist_.truncation_index(); }

  /// Outcome density at r given true polarization r0. Depends on the inputs
  /// only through their fidelity; integrates to 1 over the sphere.
  double likelihood(const PolVec& r, const PolVec& r0) const;
  /// Same density as a function of the fidelity u = (1 + r.r0)/2.
  double likelihood_at(double u) const;
  double likelihood_series_at(double u) const;

  /// Probability density of the fidelity of a single outcome:
  /// g(u) = sum_n (n+1) P_n u^n on [0, 1].
  double fidelity_pdf(double u) const;
  /// Its cumulative counterpart G(u) = sum_n P_n u^{n+1}.
  double fidelity_cdf(double u) const;

  /// Draws an estimator outcome distributed with density likelihood(r, r0).
  /// Engine draws, in order: photon number n from P_n, fidelity u as
  /// U^{1/(n+1)}, azimuth about r0.
  PolVec sample_outcome(const PolVec& r0, Rng& rng) const;

  /// Probability that the outcome lies within angular radius epsilon of the
  /// true polarization: Q(eps) = 1 - sum_n P_n ((1 + cos eps)/2)^{n+1}.
  double success_probability(double epsilon) const;
  double success_probability_series(double epsilon) const;
  /// Small-epsilon approximation; available for Fock/Poisson/thermal only.
  std::optional<double> success_probability_small_eps(double epsilon) const;

  /// Mean fidelity sum_n (n+1)/(n+2) P_n; the collective bound.
  double mean_fidelity() const;
  double mean_fidelity_series() const;
  /// Large-nbar approximation; available for Poisson/thermal only.
  std::optional<double> mean_fidelity_large_nbar() const;

  /// Fidelity variance sum_n (n+1)/(n+3) P_n - F^2.
  double fidelity_variance() const;
  double fidelity_variance_series() const;

 private:
  PhotonDistribution dist_;
};

}  // namespace polarimetry
