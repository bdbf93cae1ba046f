#pragma once

#include <Eigen/Dense>
#include <variant>

#include "wigjoint/state.hpp"

namespace wigjoint {

/// One pointer: a Gaussian (possibly the sharp limit) or a gridded state in the
/// Phi representation. For a GaussianState the components are (Phi, I).
using DetectorMode = std::variant<GaussianState, DensityMatrix>;

/// Two-mode Gaussian over (I_Q, Phi_Q, I_K, Phi_K).
struct JointGaussian {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity() * 0.5;
};

enum class Axis { Q, K };

/// State of the two detectors before the interaction: either a product of
/// independent pointers or a correlated two-mode Gaussian.
class DetectorPairState {
 public:
  static DetectorPairState product(DetectorMode q, DetectorMode k);
  /// Throws unless the covariance is symmetric positive definite and
  /// satisfies Sigma + i Omega / 2 >= 0.
  static DetectorPairState joint(JointGaussian g);

  static DetectorPairState vacuum();
  static DetectorPairState squeezed(double s);
  /// Formal zero-width limit: the detector quasi-characteristic is identically 1.
  static DetectorPairState sharp();

  bool is_product() const { return std::holds_alternative<Product>(rep_); }
  bool is_joint_gaussian() const { return std::holds_alternative<JointGaussian>(rep_); }
  bool is_gaussian() const;
  bool is_gridded() const;
  bool is_sharp() const;

  const DetectorMode& mode(Axis a) const;
  const JointGaussian& joint_gaussian() const { return std::get<JointGaussian>(rep_); }

  /// Mean and covariance over (I_Q, Phi_Q, I_K, Phi_K).
  JointGaussian moments() const;

  /// <exp i(chi_q I_Q + i_q Phi_Q + chi_k I_K + i_k Phi_K)>. Gridded modes require
  /// chi_A to fall on the lattice of the mode's Phi grid.
  cd quasi_characteristic(double chi_q, double i_q, double chi_k, double i_k) const;

 private:
  struct Product {
    DetectorMode q;
    DetectorMode k;
  };
  explicit DetectorPairState(std::variant<Product, JointGaussian> rep) : rep_(std::move(rep)) {}

  std::variant<Product, JointGaussian> rep_;
};

/// <exp i(chi I + i Phi)> of a single pointer.
cd mode_quasi_characteristic(const DetectorMode& mode, double chi, double i);
ModeMoments mode_moments(const DetectorMode& mode);
bool mode_is_sharp(const DetectorMode& mode);

/// Quasi-characteristic Tr(rho exp i(k x + q p)) of a gridded state, q = shift * dx.
cd gridded_quasi_characteristic(const DensityMatrix& rho, long shift, double k);

/// Smallest eigenvalue of Sigma + i Omega / 2 for a covariance over
/// (p_1, x_1, p_2, x_2, ...) pairs; nonnegative iff physical.
double uncertainty_margin(const Eigen::MatrixXd& covariance);

/// Characteristic function of a multimode Gaussian: exp(i v.mu - v.S.v / 2).
cd gaussian_characteristic(const Eigen::VectorXd& v, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance);

}  // namespace wigjoint
