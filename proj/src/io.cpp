#include "wigjoint/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wigjoint/error.hpp"

namespace wigjoint {
namespace {

constexpr std::array<char, 4> kMagic{'W', 'J', 'G', '1'};

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto b = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(b.begin(), b.end());
    return std::bit_cast<T>(b);
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("binary array: truncated file");
  return to_le(v);
}

std::size_t element_count(std::uint32_t n, std::uint32_t rank) {
  std::size_t c = 1;
  for (std::uint32_t r = 0; r < rank; ++r) c *= n;
  return c;
}

void require_shape(const BinaryArray& a, const Grid& grid, std::uint32_t rank) {
  if (a.rank != rank || a.n != grid.n())
    throw IoError("binary array: expected rank " + std::to_string(rank) + " with n = " + std::to_string(grid.n()) +
                  ", found rank " + std::to_string(a.rank) + " with n = " + std::to_string(a.n));
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

void write_binary(std::ostream& os, const BinaryArray& a) {
  if (a.data.size() != element_count(a.n, a.rank)) throw IoError("binary array: data size does not match header");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, a.n);
  put<std::uint32_t>(os, a.rank);
  put<std::uint32_t>(os, 0);
  for (const cd& z : a.data) {
    put<double>(os, z.real());
    put<double>(os, z.imag());
  }
  if (!os) throw IoError("binary array: write failed");
}

BinaryArray read_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw IoError("binary array: bad magic");
  BinaryArray a;
  a.n = get<std::uint32_t>(is);
  a.rank = get<std::uint32_t>(is);
  (void)get<std::uint32_t>(is);
  if (a.rank < 1 || a.rank > 2) throw IoError("binary array: unsupported rank " + std::to_string(a.rank));
  a.data.resize(element_count(a.n, a.rank));
  for (cd& z : a.data) {
    const double re = get<double>(is);
    z = cd(re, get<double>(is));
  }
  return a;
}

void write_binary_file(const std::string& path, const BinaryArray& a) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_binary(os, a);
}

BinaryArray read_binary_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_binary(is);
}

BinaryArray to_binary(const PureState& psi) {
  return {static_cast<std::uint32_t>(psi.grid().n()), 1, psi.amplitudes()};
}

BinaryArray to_binary(const Array2<cd>& values) {
  if (values.rows() != values.cols()) throw IoError("binary array: only square arrays are supported");
  return {static_cast<std::uint32_t>(values.rows()), 2, std::vector<cd>(values.flat().begin(), values.flat().end())};
}

BinaryArray to_binary(const DensityMatrix& rho) { return to_binary(rho.elements()); }

BinaryArray to_binary(const Array2<double>& values) {
  if (values.rows() != values.cols()) throw IoError("binary array: only square arrays are supported");
  BinaryArray a{static_cast<std::uint32_t>(values.rows()), 2, {}};
  a.data.assign(values.flat().begin(), values.flat().end());
  return a;
}

PureState pure_state_from_binary(const Grid& grid, const BinaryArray& a) {
  require_shape(a, grid, 1);
  return PureState(grid, a.data);
}

DensityMatrix density_from_binary(const Grid& grid, const BinaryArray& a) {
  require_shape(a, grid, 2);
  Array2<cd> e(a.n, a.n);
  std::copy(a.data.begin(), a.data.end(), e.flat().begin());
  return DensityMatrix(grid, std::move(e));
}

Array2<double> real_array_from_binary(const BinaryArray& a) {
  if (a.rank != 2) throw IoError("binary array: expected rank 2");
  Array2<double> v(a.n, a.n);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (a.data[i].imag() != 0.0) throw IoError("binary array: real array has a nonzero imaginary part");
    v.flat()[i] = a.data[i].real();
  }
  return v;
}

std::string state_summary(const DensityMatrix& rho) {
  const ModeMoments m = rho.moments();
  std::ostringstream os;
  os << "mean.Q=" << format_double(m.mean(0)) << "\n"
     << "mean.K=" << format_double(m.mean(1)) << "\n"
     << "covariance.QQ=" << format_double(m.covariance(0, 0)) << "\n"
     << "covariance.QK=" << format_double(m.covariance(0, 1)) << "\n"
     << "covariance.KK=" << format_double(m.covariance(1, 1)) << "\n"
     << "purity=" << format_double(rho.purity()) << "\n";
  return os.str();
}

std::string axis_sidecar(const Grid& grid, const std::string& row_axis, const std::string& col_axis) {
  std::ostringstream os;
  os << "n=" << grid.n() << "\n"
     << "length=" << format_double(grid.length()) << "\n"
     << "rows=" << row_axis << "\n"
     << "rows.min=" << format_double(grid.momentum(0)) << "\n"
     << "rows.max=" << format_double(grid.max_momentum()) << "\n"
     << "rows.step=" << format_double(grid.dk()) << "\n"
     << "cols=" << col_axis << "\n"
     << "cols.min=" << format_double(grid.position(0)) << "\n"
     << "cols.max=" << format_double(grid.max_position()) << "\n"
     << "cols.step=" << format_double(grid.dx()) << "\n";
  return os.str();
}

void write_wigner_csv(std::ostream& os, const WignerFunction& w) {
  const Grid& g = w.grid();
  os << "Q,K,W\n";
  for (std::size_t ik = 0; ik < g.n(); ++ik)
    for (std::size_t iq = 0; iq < g.n(); ++iq)
      os << format_double(g.position(iq)) << ',' << format_double(g.momentum(ik)) << ','
         << format_double(w.values()(ik, iq)) << '\n';
}

void write_joint_csv(std::ostream& os, const JointDistribution& p) {
  const Grid& g = p.grid();
  os << "I_Q,I_K,Pi\n";
  for (std::size_t ik = 0; ik < g.n(); ++ik)
    for (std::size_t iq = 0; iq < g.n(); ++iq)
      os << format_double(g.position(iq)) << ',' << format_double(g.momentum(ik)) << ','
         << format_double(p(ik, iq)) << '\n';
}

void write_cumulant_csv(std::ostream& os, const CumulantTable& t) {
  os << "a,b,system,detector,total\n";
  for (const auto& [ab, e] : t.entries)
    os << ab.first << ',' << ab.second << ',' << format_double(e.system) << ',' << format_double(e.detector) << ','
       << format_double(e.total) << '\n';
}

void write_residual_csv(std::ostream& os, const std::vector<ResidualRow>& rows) {
  os << "scenario,route,residual,runtime_s\n";
  for (const auto& r : rows)
    os << r.scenario << ',' << r.route << ',' << format_double(r.residual) << ',' << format_double(r.runtime_s) << '\n';
}

std::vector<ResidualRow> read_residual_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "scenario,route,residual,runtime_s")
    throw IoError("residual report: unexpected header '" + line + "'");
  std::vector<ResidualRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (f.size() != 4) throw IoError("residual report: line " + std::to_string(lineno) + " has " +
                                     std::to_string(f.size()) + " fields");
    ResidualRow r{f[0], f[1], 0.0, 0.0};
    for (auto [s, out] : {std::pair{&f[2], &r.residual}, std::pair{&f[3], &r.runtime_s}}) {
      const auto res = std::from_chars(s->data(), s->data() + s->size(), *out);
      if (res.ec != std::errc{} || res.ptr != s->data() + s->size())
        throw IoError("residual report: line " + std::to_string(lineno) + ": bad number '" + *s + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string gaussianity_report(const GaussianityReport& r) {
  std::ostringstream os;
  os << "axis.Q.mean=" << format_double(r.mean_q) << "\n"
     << "axis.Q.variance=" << format_double(r.var_q) << "\n"
     << "axis.Q.excess_kurtosis=" << format_double(r.excess_kurtosis_q) << "\n"
     << "axis.K.mean=" << format_double(r.mean_k) << "\n"
     << "axis.K.variance=" << format_double(r.var_k) << "\n"
     << "axis.K.excess_kurtosis=" << format_double(r.excess_kurtosis_k) << "\n"
     << "negativity=" << format_double(r.negativity) << "\n";
  return os.str();
}

}  // namespace wigjoint
