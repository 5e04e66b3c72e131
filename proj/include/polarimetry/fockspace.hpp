#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polarimetry/bloch.hpp"
#include "polarimetry/photon_stats.hpp"

namespace polarimetry {

using Complex = std::complex<double>;
using BlockMatrix = Eigen::MatrixXcd;
using BlockVector = Eigen::VectorXcd;

/// Operator on the two-mode Fock space truncated at total photon number
/// n_max. Operators of interest here carry no coherences between total
/// photon numbers, so the representation is block-diagonal by construction:
/// blocks[n] is the (n+1)x(n+1) matrix on the n-photon subspace in the
/// basis {|m>_H |n-m>_V : m = 0..n}, with m counting photons in the H mode.
struct FockOperator {
  std::vector<BlockMatrix> blocks;

  int n_max() const { return static_cast<int>(blocks.size()) - 1; }

  static FockOperator zeros(int n_max);
  static FockOperator identity(int n_max);
};

/// Amplitudes of the n-photon state polarized along r, expanded in the H/V
/// number basis: component m equals
///   sqrt(C(n,m)) cos^m(theta/2) (sin(theta/2) e^{i phi})^{n-m}.
/// The vector has unit norm.
BlockVector fock_state_vector(int n, const PolVec& r);

/// Overlap amplitude f between single photons polarized along r and rp;
/// |f|^2 equals fidelity(r, rp), and n-photon states overlap as f^n.
Complex mode_overlap(const PolVec& r, const PolVec& rp);

/// Element of the continuous estimator POVM at r: block n is
/// (n+1)/(4 pi) |n><n|_r, a scaled rank-1 projector.
FockOperator povm_element(const PolVec& r, int n_max);

/// Source state with polarization r: block n is P_n |n><n|_r.
FockOperator rho(const PolVec& r, const PhotonDistribution& dist, int n_max);

/// Risk operator for the uniform prior and delta cost: rho(r)/(4 pi).
FockOperator risk_operator(const PolVec& r, const PhotonDistribution& dist, int n_max);

/// Per-block Gram integrals S_n = sum_i w_i |n><n|_{r_i} over the
/// quadrature nodes. Building block for the Lagrange operator and the
/// completeness integral; requires quad.degree >= 2*n_max.
std::vector<BlockMatrix> integrate_projector_grams(int n_max, const SphereQuadrature& quad);

/// Lagrange operator: the quadrature realization of the integral of
/// risk(r) * povm(r) over the sphere. Hermitian; equals (P_n/4pi) I_n per
/// block up to quadrature accuracy. Throws if quad.degree < 2*n_max.
FockOperator upsilon(const PhotonDistribution& dist, int n_max, const SphereQuadrature& quad);

/// Residuals certifying the estimator optimality conditions at a point r:
/// the Lagrange-minus-risk operator must annihilate the POVM element from
/// both sides, be positive semidefinite, and the POVM family must resolve
/// the identity.
struct MlConditionsReport {
  double commutation_residual = 0.0;   // max operator norm of the two products
  double min_eigenvalue = 0.0;         // over all blocks of (upsilon - risk)
  double completeness_residual = 0.0;  // max entrywise |integral of povm - I|

  bool certified() const {
    return commutation_residual < 1e-9 && completeness_residual < 1e-9 &&
           min_eigenvalue > -1e-10;
  }
  /// Single-line key=value record.
  std::string to_key_value() const;
};

/// Deliberate distortion of the POVM family: block `block` of every element
/// is multiplied by `scale`. Used as a negative control; a corrupted family
/// must fail certification.
struct PovmPerturbation {
  int block = -1;
  double scale = 1.0;

  bool active() const { return block >= 0 && scale != 1.0; }
};

/// Certifies the optimality conditions for one distribution at many points.
/// The Lagrange operator and the completeness integral depend only on the
/// distribution and the truncation, so they are computed once; verify(r) is
/// then cheap per point and safe to call concurrently.
class MlConditionVerifier {
 public:
  /// Requires quad.degree >= 2*n_max (throws otherwise).
  MlConditionVerifier(const PhotonDistribution& dist, int n_max, const SphereQuadrature& quad,
                      const PovmPerturbation& perturbation = {});

  MlConditionsReport verify(const PolVec& r) const;

  const FockOperator& lagrange_operator() const { return upsilon_; }
  double completeness_residual() const { return completeness_residual_; }

 private:
  PhotonDistribution dist_;
  int n_max_;
  PovmPerturbation pert_;
  FockOperator upsilon_;
  double completeness_residual_;
};

/// One-shot certification; builds a quadrature of degree 2*n_max + 2.
MlConditionsReport verify_ml_conditions(const PolVec& r, const PhotonDistribution& dist,
                                        int n_max);
MlConditionsReport verify_ml_conditions(const PolVec& r, const PhotonDistribution& dist,
                                        int n_max, const SphereQuadrature& quad);

}  // namespace polarimetry
