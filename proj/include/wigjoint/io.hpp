#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wigjoint/conditional.hpp"

namespace wigjoint {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Binary array file: 16-byte header ("WJG1", uint32 n, uint32 rank,
/// uint32 reserved = 0), then n^rank little-endian float64 (re, im) pairs,
/// row-major.
struct BinaryArray {
  std::uint32_t n = 0;
  std::uint32_t rank = 0;
  std::vector<cd> data;
};

void write_binary(std::ostream& os, const BinaryArray& a);
BinaryArray read_binary(std::istream& is);
void write_binary_file(const std::string& path, const BinaryArray& a);
BinaryArray read_binary_file(const std::string& path);

BinaryArray to_binary(const PureState& psi);
BinaryArray to_binary(const DensityMatrix& rho);
BinaryArray to_binary(const Array2<double>& values);
BinaryArray to_binary(const Array2<cd>& values);

PureState pure_state_from_binary(const Grid& grid, const BinaryArray& a);
DensityMatrix density_from_binary(const Grid& grid, const BinaryArray& a);
Array2<double> real_array_from_binary(const BinaryArray& a);

/// mean, covariance and purity as key=value lines.
std::string state_summary(const DensityMatrix& rho);
/// Axis ranges of a Wigner or outcome lattice.
std::string axis_sidecar(const Grid& grid, const std::string& row_axis, const std::string& col_axis);

void write_wigner_csv(std::ostream& os, const WignerFunction& w);
void write_joint_csv(std::ostream& os, const JointDistribution& p);
void write_cumulant_csv(std::ostream& os, const CumulantTable& t);

struct ResidualRow {
  std::string scenario;
  std::string route;
  double residual = 0.0;
  double runtime_s = 0.0;
};
void write_residual_csv(std::ostream& os, const std::vector<ResidualRow>& rows);
std::vector<ResidualRow> read_residual_csv(std::istream& is);

/// key=value lines nested by axis, e.g. axis.Q.excess_kurtosis.
std::string gaussianity_report(const GaussianityReport& r);

}  // namespace wigjoint
