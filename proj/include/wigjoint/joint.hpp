#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wigjoint/array2.hpp"
#include "wigjoint/detector.hpp"
#include "wigjoint/wigner.hpp"

namespace wigjoint {

enum class Route { CharacteristicProduct, WignerConvolution, Oracle };
enum class Ordering { Simultaneous, KFirst, QFirst };

const char* route_name(Route r);
const char* ordering_name(Ordering o);

/// A 1D outcome density on a lattice.
struct Distribution1D {
  std::vector<double> points;
  std::vector<double> values;
  double spacing = 0.0;

  double integral() const;
  double mean() const;
  double variance() const;
};

/// Means and covariance of (I_Q, I_K).
struct OutcomeMoments {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

/// Pi(I_Q, I_K) on the system lattice: rows are I_K on the momentum
/// lattice, columns I_Q on the position lattice.
class JointDistribution {
 public:
  JointDistribution(Grid grid, Array2<double> values, Route provenance);

  const Grid& grid() const { return grid_; }
  const Array2<double>& values() const { return values_; }
  double operator()(std::size_t ik, std::size_t iq) const { return values_(ik, iq); }
  Route provenance() const { return provenance_; }

  double integral() const;
  double min() const;
  Distribution1D marginal(Axis a) const;
  OutcomeMoments moments() const;

  /// Throws InvariantError unless Pi >= -1e-9 and the integral is 1 within 1e-8.
  void validate() const;

 private:
  Grid grid_;
  Array2<double> values_;
  Route provenance_;
};

/// Z(chi_K, chi_Q) = <exp i(chi_Q I_Q + chi_K I_K)>, same layout as a
/// QuasiCharacteristic: rows chi_K on the position lattice, columns chi_Q on
/// the momentum lattice. The system and detector factors are kept alongside
/// their product.
class JointCharacteristic {
 public:
  JointCharacteristic(Grid grid, Array2<cd> system, Array2<cd> detector, Ordering ordering);

  const Grid& grid() const { return grid_; }
  Ordering ordering() const { return ordering_; }
  const Array2<cd>& values() const { return total_; }
  const Array2<cd>& system_factor() const { return system_; }
  const Array2<cd>& detector_factor() const { return detector_; }
  cd operator()(std::size_t ik, std::size_t iq) const { return total_(ik, iq); }
  cd at_origin() const { return total_(grid_.n() / 2, grid_.n() / 2); }

  double hermitian_symmetry_error() const;
  double max_abs() const;

 private:
  Grid grid_;
  Array2<cd> system_;
  Array2<cd> detector_;
  Array2<cd> total_;
  Ordering ordering_;
};

/// Arguments (I_Q, Phi_Q, I_K, Phi_K) at which the detector quasi-characteristic
/// enters the joint characteristic for the given ordering.
Eigen::Vector4d detector_arguments(Ordering o, double chi_q, double chi_k);

/// Throws ValidationError unless every gridded pointer sits on the lattice the
/// system grid dictates: the Q pointer on grid.conjugate(), the K pointer on grid.
void check_detector_lattices(const Grid& grid, const DetectorPairState& det);

JointCharacteristic joint_characteristic(const QuasiCharacteristic& zs, const DetectorPairState& det);
JointCharacteristic sequential_characteristic(const QuasiCharacteristic& zs, const DetectorPairState& det,
                                              Ordering order);

/// Probability of each outcome lattice cell of size dx by dk, integrated exactly
/// through sinc factors on the characteristic function.
Array2<double> cell_probabilities(const JointCharacteristic& z);

/// Wigner-convolution route.
JointDistribution joint_probability(const WignerFunction& ws, const DetectorPairState& det);
/// Fourier inversion of a joint characteristic.
JointDistribution joint_probability_from_characteristic(const JointCharacteristic& z);

/// <I_Q>, <I_K> and their covariance from system and detector moments.
OutcomeMoments outcome_moments(const ModeMoments& system, const DetectorPairState& det);
Eigen::Vector2d outcome_means(const ModeMoments& system, const DetectorPairState& det);
Eigen::Vector2d outcome_variances(const ModeMoments& system, const DetectorPairState& det);

struct CumulantEntry {
  double system = 0.0;
  double detector = 0.0;
  double total = 0.0;
};

/// kappa_ab: a is the order in I_Q, b in I_K.
struct CumulantTable {
  int max_order = 0;
  std::map<std::pair<int, int>, CumulantEntry> entries;
  std::vector<std::string> warnings;

  const CumulantEntry& at(int a, int b) const { return entries.at({a, b}); }
};

CumulantTable cumulants(const JointCharacteristic& z, int max_order);

/// Finite-difference weights for the derivative of the given order at 0 on
/// the given offsets (in units of the spacing).
std::vector<double> fd_weights(const std::vector<double>& offsets, int order);

/// Single pointer coupled alone: the system marginal along the axis smoothed
/// by the pointer's I noise. Q outcomes live on the position lattice, K
/// outcomes on the momentum lattice.
Distribution1D single_measurement(const DensityMatrix& rho, const DetectorMode& detector, Axis which);

/// 1D outcome density of one axis from the corresponding slice of Z.
Distribution1D marginal_from_characteristic(const JointCharacteristic& z, Axis which);

struct ArthursKellyResult {
  double min_product = 0.0;
  double s_q = 0.0;
  double s_k = 0.0;
  /// Smallest product seen anywhere in the scan, refinement included.
  double min_scanned = 0.0;
  std::size_t evaluations = 0;
};

/// Scans squeezed product detectors with s_Q, s_K in [s_min, s_max] and
/// minimizes sqrt(Var I_Q * Var I_K).
ArthursKellyResult arthurs_kelly_scan(const GaussianState& system, double s_min, double s_max,
                                      std::size_t steps = 41);

}  // namespace wigjoint
