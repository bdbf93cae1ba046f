#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wigjoint/joint.hpp"

namespace wigjoint {

/// Upper bound on the number of pure components of a composite ensemble.
inline constexpr std::size_t kMaxComponents = 16;

/// One pure component psi(x, Phi_Q, Phi_K), flattened with x slowest.
struct CompositeComponent {
  double weight = 1.0;
  std::vector<cd> amplitudes;
};

/// System (x) times the two pointers in the Phi representation. The Q pointer
/// lives on system.conjugate(), the K pointer on the system grid.
struct CompositeState {
  Grid system;
  Grid det_q;
  Grid det_k;
  std::vector<CompositeComponent> components;
  std::vector<std::string> warnings;

  std::size_t index(std::size_t x, std::size_t pq, std::size_t pk) const {
    return (x * det_q.n() + pq) * det_k.n() + pk;
  }
  /// sum |psi|^2 dx dPhi_Q dPhi_K of one component.
  double norm(std::size_t c) const;
};

/// Tensor product of the system with the detector pair. Gaussian pointers are
/// rendered on their lattices; a correlated pair must be a pure two-mode
/// Gaussian. Mixed factors are split by eigendecomposition, dropping weights
/// below 1e-12 with a warning.
CompositeState compose(const DensityMatrix& system, const DetectorPairState& det);

/// Pure two-mode Gaussian amplitude psi(Phi_Q, Phi_K), Phi_K fastest.
std::vector<cd> render_joint_gaussian(const Grid& det_q, const Grid& det_k, const JointGaussian& g);

/// Exact interaction. Simultaneous: exp i(Phi_Q Q + Phi_K K) =
/// e^{i Phi_Q Q} e^{i Phi_K K} e^{i Phi_Q Phi_K / 2}. K-first and Q-first
/// apply the two couplings one after the other, with no phase.
CompositeState apply_interaction(const CompositeState& cs, Ordering order = Ordering::Simultaneous);

/// Max-norm difference between the two BCH factorizations of the
/// simultaneous unitary applied to cs.
double bch_factorization_residual(const CompositeState& cs);

/// Born rule on the post-interaction state.
JointDistribution born_joint_distribution(const CompositeState& cs);

/// Inclusive ranges of outcome lattice indices: I_Q over columns, I_K over rows.
struct OutcomeCell {
  std::size_t iq_lo = 0, iq_hi = 0;
  std::size_t ik_lo = 0, ik_hi = 0;
};

/// Detector-traced system state, optionally conditioned on an outcome cell.
DensityMatrix reduced_system_state(const CompositeState& cs);
DensityMatrix reduced_conditional_state(const CompositeState& cs, const OutcomeCell& cell,
                                        double* cell_probability = nullptr);

struct MonteCarloResult {
  Array2<double> counts;  // outcome lattice cells, [iK][iQ]
  std::uint64_t samples = 0;
  std::uint64_t outside = 0;
  /// Mean system (Q, K) after the interaction, Q = Q' - Phi_K', K = K' + Phi_Q'.
  Eigen::Vector2d post_system_mean = Eigen::Vector2d::Zero();

  JointDistribution empirical(const Grid& grid) const;
};

/// Samples the classical trajectory equations. The system is drawn from a
/// Gaussian or from a nonnegative lattice Wigner function; every detector
/// must be Gaussian.
MonteCarloResult classical_monte_carlo(const GaussianState& system, const DetectorPairState& det, const Grid& grid,
                                       std::uint64_t samples, std::uint64_t seed);
MonteCarloResult classical_monte_carlo(const WignerFunction& system, const DetectorPairState& det,
                                       std::uint64_t samples, std::uint64_t seed);

struct BandCheck {
  double fraction_outside_3sigma = 0.0;
  double max_abs_z = 0.0;
  std::size_t cells = 0;
  /// Counts in the pooled sparse cells when that pool expects fewer than 5.
  double pooled_excess = 0.0;
};

/// Compares counts with expected cell probabilities under multinomial errors.
/// Cells expecting fewer than 5 counts are pooled.
BandCheck multinomial_bands(const MonteCarloResult& mc, const Array2<double>& cell_probabilities);

}  // namespace wigjoint
