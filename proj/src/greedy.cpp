#include "polarimetry/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace polarimetry {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Grid for the coarse basis search: 12 latitudes x 24 longitudes.
constexpr int kGridTheta = 12;
constexpr int kGridPhi = 24;
constexpr double kRefineStop = 1e-4;  // rad

int resolve_threads(int requested, int trials) {
  if (requested <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    requested = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return std::max(1, std::min(requested, trials));
}

}  // namespace

std::string GreedyTrace::to_lines() const {
  std::string out;
  char buf[96];
  for (std::size_t k = 0; k < bases.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", bases[k].theta(), bases[k].phi(),
                  outcomes[k]);
    out += buf;
  }
  return out;
}

void Posterior::add_measurement(const PolVec& basis, int outcome) {
  if (outcome != 0 && outcome != 1) {
    throw std::invalid_argument("Posterior: outcome must be 0 or 1");
  }
  factors_.push_back({basis.cartesian(), outcome == 0 ? 1.0 : -1.0});
}

double Posterior::value(const Vec3& r) const {
  double p = 1.0;
  for (const Factor& f : factors_) p *= 0.5 * (1.0 + f.sign * dot(f.direction, r));
  return p;
}

int outcome_sample(const PolVec& basis, const PolVec& truth, Rng& rng) {
  const double p_click = std::clamp(fidelity(basis, truth), 0.0, 1.0);
  return uniform01(rng) < p_click ? 0 : 1;
}

Vec3 posterior_vector(const Posterior& post, const SphereQuadrature& quad) {
  if (quad.degree < post.size() + 1) {
    throw std::invalid_argument("posterior_vector: quadrature degree too low");
  }
  Vec3 v{};
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const Vec3& r = quad.nodes[i].cartesian();
    const double w = quad.weights[i] * post.value(r);
    v = v + w * r;
  }
  return (1.0 / kFourPi) * v;
}

double posterior_evidence(const Posterior& post, const SphereQuadrature& quad) {
  if (quad.degree < post.size()) {
    throw std::invalid_argument("posterior_evidence: quadrature degree too low");
  }
  double z = 0.0;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    z += quad.weights[i] * post.value(quad.nodes[i].cartesian());
  }
  return z / kFourPi;
}

Mat3 posterior_second_moment(const Posterior& post, const SphereQuadrature& quad) {
  if (quad.degree < post.size() + 2) {
    throw std::invalid_argument("posterior_second_moment: quadrature degree too low");
  }
  Mat3 mom;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const Vec3& r = quad.nodes[i].cartesian();
    const double w = quad.weights[i] * post.value(r);
    const double rv[3] = {r.x, r.y, r.z};
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) mom.m[a][b] += w * rv[a] * rv[b];
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (b < a) {
        mom.m[a][b] = mom.m[b][a];
      } else {
        mom.m[a][b] /= kFourPi;
      }
    }
  return mom;
}

EstimateResult estimate(const Posterior& post, const SphereQuadrature& quad, Rng& rng) {
  const Vec3 v = posterior_vector(post, quad);
  const double evidence = posterior_evidence(post, quad);
  const double len = norm(v);
  if (len <= 1e-12 * std::max(evidence, 1e-300)) {
    return {uniform_sample(rng), true};
  }
  return {PolVec::from_cartesian(v), false};
}

double next_basis_objective(const Vec3& v, const Mat3& second_moment, const Vec3& candidate) {
  // The updated posterior mean after measuring along m with outcome sign s
  // is (V + s M m)/2, so the outcome-summed magnitude is as below.
  const Vec3 shift = second_moment * candidate;
  return 0.5 * (norm(v + shift) + norm(v - shift));
}

PolVec next_basis(const Posterior& post, const SphereQuadrature& quad) {
  if (post.size() < 3) {
    throw std::invalid_argument("next_basis: needs at least three prior measurements");
  }
  const Vec3 v = posterior_vector(post, quad);
  const Mat3 mom = posterior_second_moment(post, quad);

  const auto objective = [&](double theta, double phi) {
    const double st = std::sin(theta);
    return next_basis_objective(
        v, mom, Vec3{st * std::cos(phi), st * std::sin(phi), std::cos(theta)});
  };

  // Coarse pass over a fixed grid; ties keep the first candidate in grid
  // order.
  double best_theta = 0.0, best_phi = 0.0;
  double best = -1.0;
  for (int i = 0; i < kGridTheta; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / kGridTheta;
    for (int j = 0; j < kGridPhi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / kGridPhi;
      const double val = objective(theta, phi);
      if (val > best) {
        best = val;
        best_theta = theta;
        best_phi = phi;
      }
    }
  }

  // Pattern-search polish with halving steps. The guard bounds the walk on
  // near-flat objectives; the result is a valid basis either way.
  double step = std::numbers::pi / kGridTheta;
  for (int guard = 0; guard < 1000 && step >= kRefineStop; ++guard) {
    double cand_theta = best_theta, cand_phi = best_phi, cand = best;
    const double moves[4][2] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
    for (const auto& mv : moves) {
      const double theta = std::clamp(best_theta + mv[0], 0.0, std::numbers::pi);
      const double phi = best_phi + mv[1];
      const double val = objective(theta, phi);
      if (val > cand) {
        cand = val;
        cand_theta = theta;
        cand_phi = phi;
      }
    }
    if (cand > best) {
      best = cand;
      best_theta = cand_theta;
      best_phi = cand_phi;
    } else {
      step *= 0.5;
    }
  }
  return PolVec(best_theta, best_phi);
}

const SphereQuadrature& QuadratureCache::at_least(int degree) {
  const int bucket = std::max(8, ((degree + 7) / 8) * 8);
  auto it = cache_.find(bucket);
  if (it == cache_.end()) {
    it = cache_.emplace(bucket, build_quadrature(bucket)).first;
  }
  return it->second;
}

TrialResult run_trial(int n_photons, const PolVec& truth, Rng& rng, QuadratureCache& quads) {
  static const std::array<PolVec, 3> axes = {
      PolVec(0.5 * std::numbers::pi, 0.0),                     // +x
      PolVec(0.5 * std::numbers::pi, 0.5 * std::numbers::pi),  // +y
      PolVec(0.0, 0.0),                                        // +z
  };
  return run_trial(n_photons, truth, rng, quads, axes);
}

TrialResult run_trial(int n_photons, const PolVec& truth, Rng& rng, QuadratureCache& quads,
                      const std::array<PolVec, 3>& initial_bases) {
  if (n_photons < 0) throw std::invalid_argument("run_trial: n_photons must be >= 0");
  Posterior post;
  GreedyTrace trace;
  trace.bases.reserve(n_photons);
  trace.outcomes.reserve(n_photons);
  for (int k = 1; k <= n_photons; ++k) {
    const PolVec basis = k <= 3 ? initial_bases[k - 1]
                                : next_basis(post, quads.at_least(post.size() + 2));
    const int bit = outcome_sample(basis, truth, rng);
    post.add_measurement(basis, bit);
    trace.bases.push_back(basis);
    trace.outcomes.push_back(bit);
  }
  const EstimateResult est = estimate(post, quads.at_least(post.size() + 2), rng);
  trace.degenerate_estimate = est.degenerate;
  return {est.direction, fidelity(est.direction, truth), std::move(trace)};
}

std::vector<double> trial_fidelities(const PhotonDistribution& dist, int trials,
                                     std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("trial_fidelities: trials must be >= 1");
  std::vector<double> fidelities(trials);
  const int n_workers = resolve_threads(threads, trials);

  auto worker = [&](int lo, int hi) {
    QuadratureCache quads;
    for (int t = lo; t < hi; ++t) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
      const PolVec truth = uniform_sample(rng);
      const int n = dist.sample(rng);
      fidelities[t] = run_trial(n, truth, rng, quads).fidelity;
    }
  };

  if (n_workers == 1) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      const int lo = static_cast<int>(static_cast<long long>(trials) * w / n_workers);
      const int hi = static_cast<int>(static_cast<long long>(trials) * (w + 1) / n_workers);
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return fidelities;
}

McEstimate reduce_mean(const std::vector<double>& samples) {
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

McEstimate reduce_success(const std::vector<double>& samples, double epsilon) {
  // In-cap test via the fidelity threshold (1 + cos eps)/2.
  const double threshold = 0.5 * (1.0 + std::cos(epsilon));
  const double n = static_cast<double>(samples.size());
  double hits = 0.0;
  for (double x : samples) {
    if (x >= threshold) hits += 1.0;
  }
  const double p = hits / n;
  return {p, std::sqrt(std::max(0.0, p * (1.0 - p)) / n)};
}

McEstimate reduce_variance(const std::vector<double>& samples) {
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  const double var = samples.size() > 1 ? m2 * n / (n - 1.0) : 0.0;
  // Asymptotic standard error of the sample variance.
  const double se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  return {var, se};
}

McEstimate mean_fidelity_mc(const PhotonDistribution& dist, int trials, std::uint64_t seed,
                            int threads) {
  return reduce_mean(trial_fidelities(dist, trials, seed, threads));
}

McEstimate success_prob_mc(const PhotonDistribution& dist, double epsilon, int trials,
                           std::uint64_t seed, int threads) {
  return reduce_success(trial_fidelities(dist, trials, seed, threads), epsilon);
}

McEstimate fidelity_variance_mc(const PhotonDistribution& dist, int trials, std::uint64_t seed,
                                int threads) {
  return reduce_variance(trial_fidelities(dist, trials, seed, threads));
}

}  // namespace polarimetry
