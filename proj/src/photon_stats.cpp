#include "polarimetry/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polarimetry {

namespace {

void check_nbar(double nbar) {
  if (!std::isfinite(nbar) || nbar < 0.0) {
    throw std::invalid_argument("PhotonDistribution: nbar must be finite and >= 0");
  }
}

void check_tail(double tol) {
  if (!std::isfinite(tol) || tol <= 0.0 || tol >= 1.0) {
    throw std::invalid_argument("PhotonDistribution: tail tolerance must be in (0, 1)");
  }
}

}  // namespace

PhotonDistribution::PhotonDistribution(Kind kind, double nbar, int fock_n,
                                       std::vector<double> weights, double tail_tolerance)
    : kind_(kind), nbar_(nbar), fock_n_(fock_n), tail_tol_(tail_tolerance) {
  switch (kind_) {
    case Kind::fock:
      pmf_.assign(fock_n_ + 1, 0.0);
      pmf_[fock_n_] = 1.0;
      mean_ = fock_n_;
      break;
    case Kind::poisson: {
      // Kahan-compensated cumulative sum; the tail test 1 - cum <= tol needs
      // more accuracy than a plain partial sum gives at large nbar.
      double cum = 0.0, comp = 0.0;
      int n = 0;
      while (true) {
        const double p = pmf(n);
        const double y = p - comp;
        const double t = cum + y;
        comp = (t - cum) - y;
        cum = t;
        pmf_.push_back(p);
        if (1.0 - cum <= tail_tol_) break;
        if (++n > 10 * nbar_ + 2000) {
          throw std::runtime_error("PhotonDistribution: Poisson truncation did not converge");
        }
      }
      mean_ = nbar_;
      break;
    }
    case Kind::thermal: {
      // Geometric tail: mass beyond n is q^{n+1} with q = nbar/(1+nbar).
      const double q = nbar_ / (1.0 + nbar_);
      int n_max = 0;
      double tail = q;
      while (tail > tail_tol_) {
        tail *= q;
        ++n_max;
      }
      pmf_.reserve(n_max + 1);
      for (int n = 0; n <= n_max; ++n) pmf_.push_back(pmf(n));
      mean_ = nbar_;
      break;
    }
    case Kind::custom: {
      if (weights.empty()) {
        throw std::invalid_argument("PhotonDistribution: custom weights are empty");
      }
      double sum = 0.0;
      for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
          throw std::invalid_argument("PhotonDistribution: custom weights must be >= 0");
        }
        sum += w;
      }
      if (sum <= 0.0) {
        throw std::invalid_argument("PhotonDistribution: custom weights sum to zero");
      }
      pmf_ = std::move(weights);
      for (double& w : pmf_) w /= sum;
      mean_ = 0.0;
      for (std::size_t n = 0; n < pmf_.size(); ++n) mean_ += n * pmf_[n];
      break;
    }
  }
  cdf_.resize(pmf_.size());
  double cum = 0.0, comp = 0.0;
  for (std::size_t n = 0; n < pmf_.size(); ++n) {
    const double y = pmf_[n] - comp;
    const double t = cum + y;
    comp = (t - cum) - y;
    cum = t;
    cdf_[n] = cum;
  }
}

PhotonDistribution PhotonDistribution::fock(int n_photons, double tail_tolerance) {
  if (n_photons < 0) throw std::invalid_argument("PhotonDistribution: Fock N must be >= 0");
  check_tail(tail_tolerance);
  return PhotonDistribution(Kind::fock, 0.0, n_photons, {}, tail_tolerance);
}

PhotonDistribution PhotonDistribution::poisson(double nbar, double tail_tolerance) {
  check_nbar(nbar);
  check_tail(tail_tolerance);
  return PhotonDistribution(Kind::poisson, nbar, 0, {}, tail_tolerance);
}

PhotonDistribution PhotonDistribution::thermal(double nbar, double tail_tolerance) {
  check_nbar(nbar);
  check_tail(tail_tolerance);
  return PhotonDistribution(Kind::thermal, nbar, 0, {}, tail_tolerance);
}

PhotonDistribution PhotonDistribution::custom(std::vector<double> weights,
                                              double tail_tolerance) {
  check_tail(tail_tolerance);
  return PhotonDistribution(Kind::custom, 0.0, 0, std::move(weights), tail_tolerance);
}

PhotonDistribution PhotonDistribution::custom_from_file(const std::string& path,
                                                        double tail_tolerance) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distribution file: " + path);
  std::vector<double> weights;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    double w;
    if (!(ss >> w)) {
      std::string rest;
      ss.clear();
      if (ss >> rest) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": not a number");
      }
      continue;  // blank line
    }
    std::string trailing;
    if (ss >> trailing) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": trailing content");
    }
    weights.push_back(w);
  }
  if (weights.empty()) {
    throw std::runtime_error(path + ": no weights found");
  }
  return custom(std::move(weights), tail_tolerance);
}

double PhotonDistribution::param() const {
  switch (kind_) {
    case Kind::fock:
      return fock_n_;
    case Kind::poisson:
    case Kind::thermal:
      return nbar_;
    case Kind::custom:
      return mean_;
  }
  return 0.0;
}

double PhotonDistribution::pmf(int n) const {
  if (n < 0) throw std::invalid_argument("pmf: n must be >= 0");
  switch (kind_) {
    case Kind::fock:
      return n == fock_n_ ? 1.0 : 0.0;
    case Kind::poisson:
      if (nbar_ == 0.0) return n == 0 ? 1.0 : 0.0;
      return std::exp(-nbar_ + n * std::log(nbar_) - std::lgamma(n + 1.0));
    case Kind::thermal: {
      if (nbar_ == 0.0) return n == 0 ? 1.0 : 0.0;
      const double q = nbar_ / (1.0 + nbar_);
      return std::pow(q, n) / (1.0 + nbar_);
    }
    case Kind::custom:
      return n < static_cast<int>(pmf_.size()) ? pmf_[n] : 0.0;
  }
  return 0.0;
}

int PhotonDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return truncation_index();
  return static_cast<int>(it - cdf_.begin());
}

}  // namespace polarimetry
