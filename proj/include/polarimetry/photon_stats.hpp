#pragma once

#include <string>
#include <vector>

#include "polarimetry/rng.hpp"

namespace polarimetry {

/// Photon-number statistics P_n of the light source, with truncation
/// control. Instances are immutable; the pmf and cdf over the truncated
/// support are precomputed at construction, so all queries and sampling are
/// safe for concurrent use.
///
/// Supported families:
///   Fock N      P_n = delta_{nN}
///   Poisson     P_n = e^{-nbar} nbar^n / n!
///   thermal     P_n = nbar^n / (1 + nbar)^{n+1}   (Bose-Einstein)
///   custom      finite list of weights, normalized at construction
class PhotonDistribution {
 public:
  enum class Kind { fock, poisson, thermal, custom };

  static PhotonDistribution fock(int n_photons, double tail_tolerance = 1e-12);
  static PhotonDistribution poisson(double nbar, double tail_tolerance = 1e-12);
  static PhotonDistribution thermal(double nbar, double tail_tolerance = 1e-12);
  static PhotonDistribution custom(std::vector<double> weights, double tail_tolerance = 1e-12);

  /// Loads a custom distribution from a plain-text file with one
  /// non-negative weight per line (blank lines are skipped); the weights are
  /// normalized on load. Throws std::runtime_error on malformed input.
  static PhotonDistribution custom_from_file(const std::string& path,
                                             double tail_tolerance = 1e-12);

  Kind kind() const { return kind_; }
  /// Family parameter: N for Fock, nbar for Poisson/thermal, the mean for
  /// custom weights.
  double param() const;
  double tail_tolerance() const { return tail_tol_; }

  /// P_n from the family's formula. Valid for any n >= 0, also beyond the
  /// truncation index. Log-domain evaluation keeps the Poisson pmf stable
  /// for nbar up to 1e4.
  double pmf(int n) const;

  /// Smallest n_max whose tail mass sum_{n > n_max} P_n is at most the tail
  /// tolerance. Fock returns N; custom returns its length - 1.
  int truncation_index() const { return static_cast<int>(pmf_.size()) - 1; }

  double mean() const { return mean_; }

  /// Inverse-CDF draw over the truncated support (one engine draw).
  int sample(Rng& rng) const;

 private:
  PhotonDistribution(Kind kind, double nbar, int fock_n, std::vector<double> weights,
                     double tail_tolerance);

  Kind kind_;
  double nbar_ = 0.0;
  int fock_n_ = 0;
  double tail_tol_;
  std::vector<double> pmf_;   // n = 0 .. truncation_index
  std::vector<double> cdf_;
  double mean_ = 0.0;
};

}  // namespace polarimetry
