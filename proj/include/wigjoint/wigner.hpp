#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wigjoint/array2.hpp"
#include "wigjoint/state.hpp"

namespace wigjoint {

/// Real quasi-probability W(K, Q) on the phase-space lattice of a grid:
/// row index is the momentum K (centered momentum lattice), column index is
/// the position Q.
class WignerFunction {
 public:
  WignerFunction(Grid grid, Array2<double> values);

  const Grid& grid() const { return grid_; }
  const Array2<double>& values() const { return values_; }
  double operator()(std::size_t ik, std::size_t iq) const { return values_(ik, iq); }
  /// (K, Q) coordinates of index (0, 0).
  std::pair<double, double> origin_offset() const { return {grid_.momentum(0), grid_.position(0)}; }

  double integral() const;
  /// Integral over K, indexed by Q.
  std::vector<double> position_marginal() const;
  /// Integral over Q, indexed by K.
  std::vector<double> momentum_marginal() const;
  double min() const;
  double max_abs() const;
  /// Integral of |min(W, 0)|.
  double negativity() const;

  /// Imaginary residue dropped by the transform that produced this function.
  double imaginary_residue = 0.0;

 private:
  Grid grid_;
  Array2<double> values_;
};

/// Z(q, k) = Tr(rho exp i(k Q + q K)) on the conjugate lattice: the row
/// index q runs over the position lattice, the column index k over the
/// momentum lattice. Z(0, k) generates the position density and Z(q, 0) the
/// momentum density.
class QuasiCharacteristic {
 public:
  QuasiCharacteristic(Grid grid, Array2<cd> values);

  const Grid& grid() const { return grid_; }
  const Array2<cd>& values() const { return values_; }
  cd operator()(std::size_t iq, std::size_t ik) const { return values_(iq, ik); }
  cd at_origin() const { return values_(grid_.n() / 2, grid_.n() / 2); }

  /// max |Z(-q,-k) - conj Z(q,k)| over the interior of the lattice.
  double hermitian_symmetry_error() const;
  double max_abs() const;

 private:
  Grid grid_;
  Array2<cd> values_;
};

/// Evaluates W(K, Q_j) of a density matrix at arbitrary K and lattice
/// positions. Holds the band-limited interpolation of rho onto the half-step
/// grid so repeated evaluations are cheap.
class WignerEvaluator {
 public:
  explicit WignerEvaluator(const DensityMatrix& rho);

  const Grid& grid() const { return grid_; }
  double operator()(double k, std::size_t iq) const;
  /// W(K_m, Q_j) for every lattice K_m, by FFT.
  std::vector<double> column(std::size_t iq, double* imaginary_residue = nullptr) const;

 private:
  Grid grid_;
  Array2<cd> fine_;  // rho on the 2n x 2n half-step lattice
};

QuasiCharacteristic quasi_characteristic(const DensityMatrix& rho);
WignerFunction wigner_transform(const DensityMatrix& rho);

struct InverseWignerResult {
  DensityMatrix rho;
  double min_eigenvalue;
  /// False when the reconstruction has an eigenvalue below -1e-8.
  bool physical;
};
InverseWignerResult inverse_wigner(const WignerFunction& w);

/// FFT duality: Z(q,k) = sum W(K,Q) exp i(kQ + qK) dQ dK, and its inverse.
QuasiCharacteristic to_quasi_characteristic(const WignerFunction& w);
WignerFunction to_wigner(const QuasiCharacteristic& z);

double gaussian_wigner_value(const GaussianState& g, double k, double q);
WignerFunction gaussian_wigner(const Grid& grid, const GaussianState& g);

struct MomentTable {
  /// (a, b) -> integral Q^a K^b W dQ dK
  std::map<std::pair<int, int>, double> moments;
  std::vector<std::string> warnings;
  double at(int a, int b) const { return moments.at({a, b}); }
};
MomentTable wigner_moments(const WignerFunction& w, int max_order);

/// Central-moment summary of W as a single-mode (Q, K) Gaussian fit.
ModeMoments wigner_mode_moments(const WignerFunction& w);

}  // namespace wigjoint
