#include "polarimetry/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace polarimetry {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Offset of block n inside a flat ladder buffer holding vectors for all
// total photon numbers 0..n_max contiguously.
constexpr std::size_t block_offset(int n) {
  return static_cast<std::size_t>(n) * (n + 1) / 2;
}

int resolve_threads(int blocks) {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min<int>(hw == 0 ? 1 : static_cast<int>(hw), blocks));
}

}  // namespace

FockOperator FockOperator::zeros(int n_max) {
  FockOperator op;
  op.blocks.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) op.blocks.emplace_back(BlockMatrix::Zero(n + 1, n + 1));
  return op;
}

FockOperator FockOperator::identity(int n_max) {
  FockOperator op;
  op.blocks.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) op.blocks.emplace_back(BlockMatrix::Identity(n + 1, n + 1));
  return op;
}

BlockVector fock_state_vector(int n, const PolVec& r) {
  if (n < 0) throw std::invalid_argument("fock_state_vector: n must be >= 0");
  const double half = 0.5 * r.theta();
  const double c = std::cos(half);
  const double s = std::sin(half);
  BlockVector v(n + 1);
  for (int m = 0; m <= n; ++m) {
    double mag;
    if ((c == 0.0 && m > 0) || (s == 0.0 && m < n)) {
      mag = 0.0;
    } else {
      // Log-domain keeps sqrt(C(n,m)) c^m s^(n-m) finite for large n.
      double log_mag =
          0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0));
      if (m > 0) log_mag += m * std::log(c);
      if (m < n) log_mag += (n - m) * std::log(s);
      mag = std::exp(log_mag);
    }
    v[m] = std::polar(mag, (n - m) * r.phi());
  }
  return v;
}

Complex mode_overlap(const PolVec& r, const PolVec& rp) {
  const double c = std::cos(0.5 * r.theta());
  const double s = std::sin(0.5 * r.theta());
  const double cp = std::cos(0.5 * rp.theta());
  const double sp = std::sin(0.5 * rp.theta());
  return c * cp + std::polar(s * sp, rp.phi() - r.phi());
}

FockOperator povm_element(const PolVec& r, int n_max) {
  FockOperator op;
  op.blocks.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const BlockVector v = fock_state_vector(n, r);
    op.blocks.emplace_back(((n + 1) / kFourPi) * (v * v.adjoint()));
  }
  return op;
}

FockOperator rho(const PolVec& r, const PhotonDistribution& dist, int n_max) {
  FockOperator op;
  op.blocks.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const BlockVector v = fock_state_vector(n, r);
    op.blocks.emplace_back(dist.pmf(n) * (v * v.adjoint()));
  }
  return op;
}

FockOperator risk_operator(const PolVec& r, const PhotonDistribution& dist, int n_max) {
  FockOperator op = rho(r, dist, n_max);
  for (auto& block : op.blocks) block *= 1.0 / kFourPi;
  return op;
}

std::vector<BlockMatrix> integrate_projector_grams(int n_max, const SphereQuadrature& quad) {
  if (n_max < 0) throw std::invalid_argument("integrate_projector_grams: n_max must be >= 0");
  if (quad.degree < 2 * n_max) {
    throw std::invalid_argument(
        "integrate_projector_grams: quadrature degree too low, need at least 2*n_max");
  }
  const int blocks = n_max + 1;
  std::vector<BlockMatrix> grams(blocks);
  for (int n = 0; n < blocks; ++n) grams[n] = BlockMatrix::Zero(n + 1, n + 1);

  // sqrt(n/m) ladder factors, shared read-only across workers.
  std::vector<double> ratio(block_offset(n_max) + n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n)
    for (int m = 1; m <= n; ++m)
      ratio[block_offset(n) + m] = std::sqrt(static_cast<double>(n) / m);

  const int num_nodes = static_cast<int>(quad.nodes.size());
  constexpr int kChunk = 128;
  const int n_threads = resolve_threads(blocks);

  // Each worker owns the blocks {n : n % n_threads == t} and accumulates
  // them over the full node sequence in chunk order, so the result is
  // independent of the number of workers.
  auto worker = [&](int t) {
    std::vector<Complex> ladder(block_offset(n_max) + n_max + 1);
    std::vector<BlockMatrix> rows(blocks);
    for (int n = t; n < blocks; n += n_threads) rows[n] = BlockMatrix(kChunk, n + 1);

    for (int base = 0; base < num_nodes; base += kChunk) {
      const int count = std::min(kChunk, num_nodes - base);
      for (int i = 0; i < count; ++i) {
        const PolVec& node = quad.nodes[base + i];
        const double sw = std::sqrt(quad.weights[base + i]);
        const double c = std::cos(0.5 * node.theta());
        const Complex s_phase = std::polar(std::sin(0.5 * node.theta()), node.phi());
        ladder[0] = Complex(1.0, 0.0);
        for (int n = 1; n <= n_max; ++n) {
          Complex* vn = ladder.data() + block_offset(n);
          const Complex* vp = ladder.data() + block_offset(n - 1);
          const double* rat = ratio.data() + block_offset(n);
          vn[0] = vp[0] * s_phase;
          for (int m = 1; m <= n; ++m) vn[m] = vp[m - 1] * (c * rat[m]);
        }
        for (int n = t; n < blocks; n += n_threads) {
          const Complex* vn = ladder.data() + block_offset(n);
          auto row = rows[n].row(i);
          for (int m = 0; m <= n; ++m) row(m) = sw * std::conj(vn[m]);
        }
      }
      for (int n = t; n < blocks; n += n_threads) {
        const auto chunk_rows = rows[n].topRows(count);
        grams[n].selfadjointView<Eigen::Lower>().rankUpdate(chunk_rows.adjoint(), 1.0);
      }
    }
    for (int n = t; n < blocks; n += n_threads) {
      grams[n] = BlockMatrix(grams[n].selfadjointView<Eigen::Lower>());
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  return grams;
}

FockOperator upsilon(const PhotonDistribution& dist, int n_max, const SphereQuadrature& quad) {
  const auto grams = integrate_projector_grams(n_max, quad);
  FockOperator op;
  op.blocks.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    op.blocks.emplace_back((dist.pmf(n) * (n + 1) / (kFourPi * kFourPi)) * grams[n]);
  }
  return op;
}

std::string MlConditionsReport::to_key_value() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "commutation_residual=%.6e min_eigenvalue=%.6e completeness_residual=%.6e "
                "certified=%d",
                commutation_residual, min_eigenvalue, completeness_residual,
                certified() ? 1 : 0);
  return buf;
}

MlConditionVerifier::MlConditionVerifier(const PhotonDistribution& dist, int n_max,
                                         const SphereQuadrature& quad,
                                         const PovmPerturbation& perturbation)
    : dist_(dist), n_max_(n_max), pert_(perturbation) {
  const auto grams = integrate_projector_grams(n_max, quad);
  upsilon_.blocks.reserve(n_max + 1);
  completeness_residual_ = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double scale = (pert_.block == n) ? pert_.scale : 1.0;
    upsilon_.blocks.emplace_back((scale * dist_.pmf(n) * (n + 1) / (kFourPi * kFourPi)) *
                                 grams[n]);
    const BlockMatrix deviation =
        (scale * (n + 1) / kFourPi) * grams[n] - BlockMatrix::Identity(n + 1, n + 1);
    completeness_residual_ =
        std::max(completeness_residual_, deviation.cwiseAbs().maxCoeff());
  }
}

MlConditionsReport MlConditionVerifier::verify(const PolVec& r) const {
  MlConditionsReport report;
  report.completeness_residual = completeness_residual_;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= n_max_; ++n) {
    const BlockVector v = fock_state_vector(n, r);
    const double pn = dist_.pmf(n);
    const BlockMatrix gap = upsilon_.blocks[n] - (pn / kFourPi) * (v * v.adjoint());

    // The POVM block is kappa |n><n|, so both products are rank one and
    // their operator norms reduce to vector norms.
    const double scale = (pert_.block == n) ? pert_.scale : 1.0;
    const double kappa = scale * (n + 1) / kFourPi;
    const double vnorm = v.norm();
    const double left = kappa * (gap * v).norm() * vnorm;
    const double right = kappa * (gap.adjoint() * v).norm() * vnorm;
    report.commutation_residual = std::max({report.commutation_residual, left, right});

    Eigen::SelfAdjointEigenSolver<BlockMatrix> solver(gap, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = std::min(report.min_eigenvalue, solver.eigenvalues().minCoeff());
  }
  return report;
}

MlConditionsReport verify_ml_conditions(const PolVec& r, const PhotonDistribution& dist,
                                        int n_max, const SphereQuadrature& quad) {
  return MlConditionVerifier(dist, n_max, quad).verify(r);
}

MlConditionsReport verify_ml_conditions(const PolVec& r, const PhotonDistribution& dist,
                                        int n_max) {
  const SphereQuadrature quad = build_quadrature(2 * n_max + 2);
  return verify_ml_conditions(r, dist, n_max, quad);
}

}  // namespace polarimetry
