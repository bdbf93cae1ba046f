#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "wigjoint/array2.hpp"
#include "wigjoint/fft.hpp"
#include "wigjoint/grid.hpp"

namespace wigjoint {

inline constexpr double kClipTolerance = 1e-10;

/// First and second moments of a single mode, ordered (position-like, momentum-like).
struct ModeMoments {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  /// Symmetrized covariance: cov(0,1) = <{dx, dp}>/2.
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

/// Wavefunction sampled on a grid: psi_j = psi(x_j), normalized as sum |psi_j|^2 dx = 1.
class PureState {
 public:
  /// Normalizes the amplitudes; throws if they vanish identically.
  PureState(Grid grid, std::vector<cd> amplitudes);

  const Grid& grid() const { return grid_; }
  const std::vector<cd>& amplitudes() const { return amplitudes_; }

  double norm() const;
  /// Amplitudes on the centered momentum lattice, normalized with dk.
  std::vector<cd> momentum_amplitudes() const;
  static PureState from_momentum(Grid grid, std::vector<cd> momentum_amplitudes);

  /// Probability outside the grid interior (edge bands) in position and momentum.
  double position_tail_mass() const;
  double momentum_tail_mass() const;

  ModeMoments moments() const;

 private:
  Grid grid_;
  std::vector<cd> amplitudes_;
};

/// Density matrix rho(x_a, x_b) in the position representation with
/// trace sum_a rho(x_a, x_a) dx = 1.
class DensityMatrix {
 public:
  /// Validates hermiticity, trace and positivity.
  DensityMatrix(Grid grid, Array2<cd> elements);
  /// Skips validation; used for intermediate results that are checked later.
  static DensityMatrix unchecked(Grid grid, Array2<cd> elements);

  const Grid& grid() const { return grid_; }
  const Array2<cd>& elements() const { return elements_; }
  cd operator()(std::size_t a, std::size_t b) const { return elements_(a, b); }

  cd trace() const;
  /// Tr(rho^2) = sum_ab |rho_ab|^2 dx^2.
  double purity() const;
  double hermiticity_error() const;
  /// Eigenvalues of the operator (matrix rho_ab dx), ascending.
  std::vector<double> eigenvalues() const;
  double min_eigenvalue() const;

  /// Spectral decomposition into weighted pure states, dropping weights below `cutoff`.
  std::vector<std::pair<double, PureState>> pure_components(double cutoff = 1e-12) const;

  std::vector<double> position_density() const;
  std::vector<double> momentum_density() const;
  /// rho~(k, k') on the centered momentum lattice.
  Array2<cd> momentum_representation() const;

  ModeMoments moments() const;

 private:
  DensityMatrix(Grid grid, Array2<cd> elements, bool validate);

  Grid grid_;
  Array2<cd> elements_;
};

/// Gaussian single-mode state given by mean and covariance of
/// (position-like, momentum-like). For a detector that is (Phi, I).
class GaussianState {
 public:
  /// Requires a symmetric positive definite covariance with det >= 1/4.
  GaussianState(Eigen::Vector2d mean, Eigen::Matrix2d covariance);

  /// Positive semidefinite covariance without the uncertainty condition (the
  /// sharp-detector limit and classical point distributions).
  static GaussianState classical(Eigen::Vector2d mean, Eigen::Matrix2d covariance);

  /// Minimum-uncertainty state with Var(x) = s/2, Var(p) = 1/(2s).
  static GaussianState squeezed(double x0, double p0, double s);
  static GaussianState vacuum() { return squeezed(0.0, 0.0, 1.0); }
  /// Detector parametrization in (I, Phi) terms: Var(I) = var_i, Var(Phi) = var_phi.
  static GaussianState detector(double mean_i, double mean_phi, double var_i, double var_phi,
                                double cov_i_phi = 0.0);
  /// Detector squeezed so that Var(I) = s/2 and Var(Phi) = 1/(2s).
  static GaussianState squeezed_detector(double s, double mean_i = 0.0, double mean_phi = 0.0);
  /// Zero-width pointer: the formal sharp limit with vanishing covariance.
  static GaussianState sharp_detector() { return classical(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()); }

  const Eigen::Vector2d& mean() const { return mean_; }
  const Eigen::Matrix2d& covariance() const { return covariance_; }
  bool is_classical() const { return classical_; }
  bool is_singular() const { return covariance_.determinant() <= 1e-300; }

  double purity() const { return 0.5 / std::sqrt(covariance_.determinant()); }
  ModeMoments moments() const { return {mean_, covariance_}; }

 private:
  GaussianState(Eigen::Vector2d mean, Eigen::Matrix2d covariance, bool classical);

  Eigen::Vector2d mean_;
  Eigen::Matrix2d covariance_;
  bool classical_ = false;
};

// Constructors. Each throws ValidationError if the state is clipped by the
// grid (tail mass above kClipTolerance in position or momentum).
PureState coherent_state(const Grid& grid, double q0, double k0, double squeeze = 1.0);
PureState fock_state(const Grid& grid, int m);
PureState cat_state(const Grid& grid, double q0);

DensityMatrix density_from_pure(const PureState& psi);
DensityMatrix mix(const std::vector<std::pair<double, DensityMatrix>>& states);
/// Closed-form density matrix of a (possibly mixed) Gaussian state.
DensityMatrix gaussian_density(const Grid& grid, const GaussianState& g);

/// Throws ValidationError if either tail mass exceeds kClipTolerance.
void check_not_clipped(const PureState& psi, const char* what);

}  // namespace wigjoint
