#pragma once

#include "wigjoint/oracle.hpp"

namespace wigjoint {

/// Normalization floor on Pi(I_Q, I_K).
inline constexpr double kWeightFloor = 1e-12;

/// Post-measurement system Wigner function given the readout (I_Q, I_K).
/// Below the weight floor the values are left unnormalized and flagged.
struct ConditionalWigner {
  double outcome_q = 0.0;
  double outcome_k = 0.0;
  WignerFunction wigner;
  double weight = 0.0;
  bool below_floor = false;
};

/// Conditional quasi-characteristic; `unnormalized` keeps Z(0,0) = Pi(I).
struct ConditionalCharacteristic {
  double outcome_q = 0.0;
  double outcome_k = 0.0;
  QuasiCharacteristic unnormalized;
  double weight = 0.0;
  bool below_floor = false;

  QuasiCharacteristic normalized() const;
};

ConditionalWigner conditional_wigner(const WignerFunction& ws, const DetectorPairState& det, double i_q, double i_k);

/// Fourier route: Z_S(q + chi_K, k + chi_Q) D(chi_Q, q + chi_K/2; chi_K, -k - chi_Q/2)
/// integrated against e^{-i chi.I}.
/// Z_S outside the stored lattice is taken as zero.
ConditionalCharacteristic conditional_quasi_characteristic(const QuasiCharacteristic& zs, const DetectorPairState& det,
                                                           double i_q, double i_k);
/// Same, with Z_S extended to position shifts up to +-(n-1) by lattice sums over rho.
ConditionalCharacteristic conditional_quasi_characteristic(const DensityMatrix& rho, const DetectorPairState& det,
                                                           double i_q, double i_k);

/// Outcome-averaged conditional state over a cell of lattice outcomes, weighted
/// by Pi: the counterpart of the oracle's reduced_conditional_state.
ConditionalWigner conditional_cell_average(const WignerFunction& ws, const DetectorPairState& det,
                                           const OutcomeCell& cell);

struct PosteriorCheck {
  /// sum_I dI Pi(I) W(.|I) on the outcome lattice.
  WignerFunction posterior_average;
  double residual = 0.0;
};

/// Compares the outcome-averaged conditional state with a reference, normally
/// the Wigner function of the oracle's detector-traced post-interaction state.
PosteriorCheck posterior_consistency(const WignerFunction& ws, const DetectorPairState& det,
                                     const WignerFunction& reference);
/// Builds the reference from the oracle.
PosteriorCheck posterior_consistency(const DensityMatrix& rho, const DetectorPairState& det);

struct GaussianityReport {
  double mean_q = 0.0, mean_k = 0.0;
  double var_q = 0.0, var_k = 0.0;
  double excess_kurtosis_q = 0.0;
  double excess_kurtosis_k = 0.0;
  double negativity = 0.0;
};

GaussianityReport gaussianity_diagnostic(const WignerFunction& w);
inline GaussianityReport gaussianity_diagnostic(const ConditionalWigner& cw) { return gaussianity_diagnostic(cw.wigner); }

}  // namespace wigjoint
