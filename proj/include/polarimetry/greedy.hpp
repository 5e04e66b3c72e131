#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polarimetry/bloch.hpp"
#include "polarimetry/photon_stats.hpp"

namespace polarimetry {

/// Record of one adaptive measurement sequence: the bases measured, the
/// binary outcomes (0 = click along the basis, 1 = click along its
/// antipode), and whether the final estimate fell back to a random draw
/// because the posterior mean vector vanished.
struct GreedyTrace {
  std::vector<PolVec> bases;
  std::vector<int> outcomes;
  bool degenerate_estimate = false;

  /// Line-delimited export, one "theta,phi,outcome" record per measurement.
  std::string to_lines() const;
};

/// Unnormalized posterior over the true polarization after a sequence of
/// single-photon projective measurements. Each measurement contributes a
/// factor (1 + sign * m.r)/2; outcome 1 is absorbed as sign -1 on the
/// measured direction rather than stored as the antipodal basis.
class Posterior {
 public:
  struct Factor {
    Vec3 direction;
    double sign;  // +1 or -1
  };

  void add_measurement(const PolVec& basis, int outcome);

  /// Product of the factor probabilities at a unit vector r; lies in [0, 1].
  double value(const Vec3& r) const;

  int size() const { return static_cast<int>(factors_.size()); }
  const std::vector<Factor>& factors() const { return factors_; }

 private:
  std::vector<Factor> factors_;
};

/// Symmetric 3x3 matrix of posterior second moments.
struct Mat3 {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
};

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a.m[0][0] * v.x + a.m[0][1] * v.y + a.m[0][2] * v.z,
          a.m[1][0] * v.x + a.m[1][1] * v.y + a.m[1][2] * v.z,
          a.m[2][0] * v.x + a.m[2][1] * v.y + a.m[2][2] * v.z};
}

/// Single projective measurement along basis m on a photon polarized along
/// r0: returns 0 with probability (1 + m.r0)/2, else 1.
int outcome_sample(const PolVec& basis, const PolVec& truth, Rng& rng);

/// Prior-weighted posterior mean of the polarization vector,
/// V = integral of posterior(r) r / (4 pi) over the sphere. Exact for a
/// quadrature of degree >= size + 1 (throws below that).
Vec3 posterior_vector(const Posterior& post, const SphereQuadrature& quad);

/// Prior-weighted posterior mass, integral of posterior(r) / (4 pi).
double posterior_evidence(const Posterior& post, const SphereQuadrature& quad);

/// Prior-weighted second moment matrix, integral of posterior(r) r r^T
/// / (4 pi). Requires degree >= size + 2.
Mat3 posterior_second_moment(const Posterior& post, const SphereQuadrature& quad);

struct EstimateResult {
  PolVec direction;
  bool degenerate;  // posterior mean vanished; direction drawn uniformly
};

/// Optimal estimate V/|V|. Symmetric outcome histories can give V = 0
/// (detected as |V| <= 1e-12 * evidence); the estimate then falls back to a
/// uniform random direction and is flagged.
EstimateResult estimate(const Posterior& post, const SphereQuadrature& quad, Rng& rng);

/// Basis for the next measurement: maximizes the outcome-summed magnitude
/// of the updated posterior mean, |V(post + (m,+1))| + |V(post + (m,-1))|.
/// Searched on a deterministic 12x24 latitude-longitude grid followed by a
/// pattern-search polish on (theta, phi) down to steps below 1e-4 rad.
/// Requires at least 3 prior measurements and quadrature degree >= size + 2.
PolVec next_basis(const Posterior& post, const SphereQuadrature& quad);

/// Objective maximized by next_basis, exposed for consistency checks.
double next_basis_objective(const Vec3& v, const Mat3& second_moment, const Vec3& candidate);

/// Lazily built shared quadratures, bucketed by degree so consecutive
/// adaptive steps reuse the same rule. Not thread safe; give each worker
/// its own cache.
class QuadratureCache {
 public:
  const SphereQuadrature& at_least(int degree);

 private:
  std::map<int, SphereQuadrature> cache_;
};

struct TrialResult {
  PolVec estimate;
  double fidelity;
  GreedyTrace trace;
};

/// Runs one adaptive sequence on n_photons copies: the first three bases
/// are fixed (+x, +y, +z by default), later ones come from next_basis;
/// the final estimate uses the full posterior. n_photons = 0 yields a
/// uniformly random estimate.
TrialResult run_trial(int n_photons, const PolVec& truth, Rng& rng, QuadratureCache& quads);
TrialResult run_trial(int n_photons, const PolVec& truth, Rng& rng, QuadratureCache& quads,
                      const std::array<PolVec, 3>& initial_bases);

/// Per-trial fidelities for `trials` independent sequences. Each trial t
/// owns the engine mt19937_64(derive_seed(seed, t)) and draws, in order,
/// the true polarization (uniform) and the photon number (from dist), so
/// the output is identical for any worker count. threads = 0 uses the
/// hardware concurrency.
std::vector<double> trial_fidelities(const PhotonDistribution& dist, int trials,
                                     std::uint64_t seed, int threads = 0);

struct McEstimate {
  double value;
  double std_error;
};

/// Monte Carlo mean fidelity of the adaptive scheme.
McEstimate mean_fidelity_mc(const PhotonDistribution& dist, int trials, std::uint64_t seed,
                            int threads = 0);
/// Monte Carlo probability that the estimate lands within angular radius
/// epsilon of the true polarization.
McEstimate success_prob_mc(const PhotonDistribution& dist, double epsilon, int trials,
                           std::uint64_t seed, int threads = 0);
/// Monte Carlo variance of the per-trial fidelity.
McEstimate fidelity_variance_mc(const PhotonDistribution& dist, int trials, std::uint64_t seed,
                                int threads = 0);

/// Shared reductions over a fidelity sample, used by the *_mc drivers.
McEstimate reduce_mean(const std::vector<double>& samples);
McEstimate reduce_success(const std::vector<double>& samples, double epsilon);
McEstimate reduce_variance(const std::vector<double>& samples);

}  // namespace polarimetry
