#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "polarimetry/fockspace.hpp"
#include "test_helpers.hpp"

using namespace polarimetry;
using std::numbers::pi;

namespace {

constexpr double kFourPi = 4.0 * pi;

double max_block_abs_diff(const FockOperator& a, const FockOperator& b) {
  double d = 0.0;
  for (int n = 0; n <= a.n_max(); ++n) {
    d = std::max(d, (a.blocks[n] - b.blocks[n]).cwiseAbs().maxCoeff());
  }
  return d;
}

}  // namespace

TEST_CASE("fock state vector basics") {
  const PolVec north(0.0, 0.0);
  const BlockVector h1 = fock_state_vector(1, north);
  CHECK(std::abs(h1[1] - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(h1[0]) < 1e-15);

  const PolVec diag(pi / 2, 0.0);
  const BlockVector d1 = fock_state_vector(1, diag);
  CHECK(std::abs(d1[0] - Complex(1.0 / std::sqrt(2.0), 0.0)) < 1e-14);
  CHECK(std::abs(d1[1] - Complex(1.0 / std::sqrt(2.0), 0.0)) < 1e-14);

  Rng rng(31);
  for (int n : {0, 1, 2, 5, 17, 60}) {
    const PolVec r = uniform_sample(rng);
    CHECK(fock_state_vector(n, r).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(fock_state_vector(-1, north), std::invalid_argument);
}

TEST_CASE("n-photon overlaps follow the single-photon overlap power law") {
  Rng rng(32);
  for (int i = 0; i < 50; ++i) {
    const PolVec a = uniform_sample(rng);
    const PolVec b = uniform_sample(rng);
    const Complex f = mode_overlap(a, b);
    CHECK(std::abs(std::norm(f) - fidelity(a, b)) < 1e-12);
    for (int n : {1, 2, 3, 10, 30}) {
      const Complex brute = fock_state_vector(n, a).dot(fock_state_vector(n, b));
      CHECK(std::abs(brute - std::pow(f, n)) < 1e-12);
    }
  }
}

TEST_CASE("povm element blocks are scaled rank-1 projectors") {
  Rng rng(33);
  const PolVec r = uniform_sample(rng);
  const FockOperator povm = povm_element(r, 6);

  CHECK(std::abs(povm.blocks[0](0, 0) - Complex(1.0 / kFourPi, 0.0)) < 1e-15);
  for (int n = 0; n <= 6; ++n) {
    CHECK(std::abs(povm.blocks[n].trace().real() - (n + 1) / kFourPi) < 1e-12);
    CHECK(std::abs(povm.blocks[n].trace().imag()) < 1e-15);

    Eigen::SelfAdjointEigenSolver<BlockMatrix> solver(povm.blocks[n]);
    const auto ev = solver.eigenvalues();
    CHECK(std::abs(ev[n] - (n + 1) / kFourPi) < 1e-12);
    for (int k = 0; k < n; ++k) CHECK(std::abs(ev[k]) < 1e-12);
  }
}

TEST_CASE("rho and the risk operator") {
  Rng rng(34);
  const PolVec r = uniform_sample(rng);

  SUBCASE("fock state occupies a single block with unit trace") {
    const FockOperator state = rho(r, PhotonDistribution::fock(3), 5);
    for (int n = 0; n <= 5; ++n) {
      const double tr = state.blocks[n].trace().real();
      if (n == 3) {
        CHECK(tr == doctest::Approx(1.0).epsilon(1e-12));
      } else {
        CHECK(state.blocks[n].cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }

  SUBCASE("poisson trace reaches 1 at the truncation index") {
    const auto dist = PhotonDistribution::poisson(1.0);
    const FockOperator state = rho(r, dist, dist.truncation_index());
    double tr = 0.0;
    for (const auto& block : state.blocks) tr += block.trace().real();
    CHECK(std::abs(tr - 1.0) < 1e-12);
  }

  SUBCASE("risk operator is rho/(4 pi) entrywise") {
    const auto dist = PhotonDistribution::thermal(1.0);
    const FockOperator state = rho(r, dist, 8);
    FockOperator scaled = state;
    for (auto& block : scaled.blocks) block *= 1.0 / kFourPi;
    CHECK(max_block_abs_diff(risk_operator(r, dist, 8), scaled) < 1e-15);
  }
}

TEST_CASE("rotation about z acts as a diagonal phase unitary on povm blocks") {
  Rng rng(35);
  for (int i = 0; i < 5; ++i) {
    const PolVec r = uniform_sample(rng);
    const double alpha = 2 * pi * uniform01(rng);
    const PolVec rotated(r.theta(), r.phi() + alpha);
    const FockOperator a = povm_element(rotated, 5);
    const FockOperator b = povm_element(r, 5);
    for (int n = 0; n <= 5; ++n) {
      BlockMatrix u = BlockMatrix::Zero(n + 1, n + 1);
      for (int m = 0; m <= n; ++m) u(m, m) = std::polar(1.0, (n - m) * alpha);
      const BlockMatrix expected = u * b.blocks[n] * u.adjoint();
      CHECK((a.blocks[n] - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("completeness: the povm family resolves the identity per block") {
  const int n_max = 10;
  const SphereQuadrature quad = build_quadrature(2 * n_max + 2);
  const auto grams = integrate_projector_grams(n_max, quad);
  for (int n = 0; n <= n_max; ++n) {
    const BlockMatrix resolved = ((n + 1) / kFourPi) * grams[n];
    const BlockMatrix identity = BlockMatrix::Identity(n + 1, n + 1);
    CHECK((resolved - identity).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(integrate_projector_grams(10, build_quadrature(10)), std::invalid_argument);
}

TEST_CASE("upsilon closed forms") {
  SUBCASE("fock distribution") {
    const int N = 3;
    const SphereQuadrature quad = build_quadrature(2 * 5 + 2);
    const FockOperator up = upsilon(PhotonDistribution::fock(N), 5, quad);
    for (int n = 0; n <= 5; ++n) {
      const BlockMatrix expected =
          n == N ? BlockMatrix((1.0 / kFourPi) * BlockMatrix::Identity(n + 1, n + 1))
                 : BlockMatrix(BlockMatrix::Zero(n + 1, n + 1));
      CHECK((up.blocks[n] - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("poisson vacuum block") {
    const SphereQuadrature quad = build_quadrature(2 * 4 + 2);
    const FockOperator up = upsilon(PhotonDistribution::poisson(1.0), 4, quad);
    CHECK(std::abs(up.blocks[0](0, 0) - Complex(std::exp(-1.0) / kFourPi, 0.0)) < 1e-12);
  }

  SUBCASE("thermal quadrature matches the analytic form") {
    const int n_max = 6;
    const auto dist = PhotonDistribution::thermal(1.0);
    const SphereQuadrature quad = build_quadrature(2 * n_max + 2);
    const FockOperator up = upsilon(dist, n_max, quad);
    FockOperator expected = FockOperator::zeros(n_max);
    for (int n = 0; n <= n_max; ++n) {
      expected.blocks[n] = (dist.pmf(n) / kFourPi) * BlockMatrix::Identity(n + 1, n + 1);
    }
    CHECK(max_block_abs_diff(up, expected) < 1e-10);
  }

  SUBCASE("insufficient quadrature degree is an error") {
    const SphereQuadrature quad = build_quadrature(6);
    CHECK_THROWS_AS(upsilon(PhotonDistribution::fock(2), 4, quad), std::invalid_argument);
  }
}

TEST_CASE("ml optimality conditions certify for representative distributions") {
  Rng rng(36);
  const std::vector<PhotonDistribution> dists = {
      PhotonDistribution::fock(0), PhotonDistribution::fock(2), PhotonDistribution::fock(3),
      PhotonDistribution::poisson(1.0), PhotonDistribution::thermal(1.0)};
  for (const auto& dist : dists) {
    const int n_max = dist.truncation_index();
    const SphereQuadrature quad = build_quadrature(2 * n_max + 2);
    const MlConditionVerifier verifier(dist, n_max, quad);
    for (int i = 0; i < 5; ++i) {
      const PolVec r = uniform_sample(rng);
      const MlConditionsReport report = verifier.verify(r);
      CAPTURE(n_max);
      CHECK(report.commutation_residual < 1e-9);
      CHECK(report.min_eigenvalue > -1e-10);
      CHECK(report.completeness_residual < 1e-9);
      CHECK(report.certified());
    }
  }
}

TEST_CASE("gap operator spectrum for a fock state") {
  // Block N of upsilon - risk has one null direction (the state itself) and
  // N eigenvalues P_N/(4 pi); zero is attained.
  const int N = 4;
  Rng rng(37);
  const PolVec r = uniform_sample(rng);
  const auto dist = PhotonDistribution::fock(N);
  const SphereQuadrature quad = build_quadrature(2 * N + 2);
  const FockOperator up = upsilon(dist, N, quad);
  const FockOperator risk = risk_operator(r, dist, N);
  const BlockMatrix gap = up.blocks[N] - risk.blocks[N];
  Eigen::SelfAdjointEigenSolver<BlockMatrix> solver(gap);
  const auto ev = solver.eigenvalues();
  CHECK(std::abs(ev[0]) < 1e-12);
  for (int k = 1; k <= N; ++k) CHECK(std::abs(ev[k] - 1.0 / kFourPi) < 1e-10);
}

TEST_CASE("negative control: corrupted povm family fails certification") {
  Rng rng(38);
  const PolVec r = uniform_sample(rng);
  const auto dist = PhotonDistribution::fock(3);
  const SphereQuadrature quad = build_quadrature(2 * 3 + 2);
  PovmPerturbation pert;
  pert.block = 3;
  pert.scale = 1.01;
  const MlConditionVerifier verifier(dist, 3, quad, pert);
  const MlConditionsReport report = verifier.verify(r);
  CHECK_FALSE(report.certified());
  CHECK(report.completeness_residual > 1e-9);
  CHECK(report.commutation_residual > 1e-9);
}

TEST_CASE("report serializes to a single key=value line") {
  MlConditionsReport report;
  report.commutation_residual = 1.5e-12;
  report.min_eigenvalue = -2.0e-13;
  report.completeness_residual = 3.0e-11;
  const std::string line = report.to_key_value();
  CHECK(line.find("commutation_residual=1.5") != std::string::npos);
  CHECK(line.find("min_eigenvalue=-2.0") != std::string::npos);
  CHECK(line.find("certified=1") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
}
