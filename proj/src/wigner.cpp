#include "wigjoint/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wigjoint/error.hpp"

namespace wigjoint {
namespace {

constexpr double kPi = std::numbers::pi;

// Band-limited interpolation of a length-n lattice function onto the 2n-point
// half-step lattice of the same box.
std::vector<cd> upsample(std::span<const cd> in) {
  const std::size_t n = in.size();
  std::vector<cd> spec(in.begin(), in.end());
  centered_dft(spec, FftSign::Minus);
  std::vector<cd> fine(2 * n, cd(0.0));
  for (std::size_t m = 1; m < n; ++m) fine[m + n / 2] = spec[m];
  // Split the Nyquist bin symmetrically.
  fine[n / 2] = 0.5 * spec[0];
  fine[n / 2 + n] = 0.5 * spec[0];
  centered_dft(fine, FftSign::Plus);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : fine) v *= inv_n;
  return fine;
}

}  // namespace

// ---------------------------------------------------------------------------

WignerFunction::WignerFunction(Grid grid, Array2<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.n() || values_.cols() != grid_.n())
    throw ValidationError("wigner function: shape does not match grid");
}

double WignerFunction::integral() const {
  double s = 0.0;
  for (double v : values_.flat()) s += v;
  return s * grid_.dx() * grid_.dk();
}

std::vector<double> WignerFunction::position_marginal() const {
  std::vector<double> out(grid_.n(), 0.0);
  for (std::size_t ik = 0; ik < grid_.n(); ++ik)
    for (std::size_t iq = 0; iq < grid_.n(); ++iq) out[iq] += values_(ik, iq) * grid_.dk();
  return out;
}

std::vector<double> WignerFunction::momentum_marginal() const {
  std::vector<double> out(grid_.n(), 0.0);
  for (std::size_t ik = 0; ik < grid_.n(); ++ik)
    for (std::size_t iq = 0; iq < grid_.n(); ++iq) out[ik] += values_(ik, iq) * grid_.dx();
  return out;
}

double WignerFunction::min() const { return *std::min_element(values_.flat().begin(), values_.flat().end()); }

double WignerFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_.flat()) m = std::max(m, std::abs(v));
  return m;
}

double WignerFunction::negativity() const {
  double s = 0.0;
  for (double v : values_.flat()) s += std::max(0.0, -v);
  return s * grid_.dx() * grid_.dk();
}

QuasiCharacteristic::QuasiCharacteristic(Grid grid, Array2<cd> values) : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.n() || values_.cols() != grid_.n())
    throw ValidationError("quasi-characteristic: shape does not match grid");
}

double QuasiCharacteristic::hermitian_symmetry_error() const {
  // Index i <-> n - i maps q -> -q for i >= 1; row/column 0 has no partner.
  const std::size_t n = grid_.n();
  double e = 0.0;
  for (std::size_t a = 1; a < n; ++a)
    for (std::size_t b = 1; b < n; ++b)
      e = std::max(e, std::abs(values_(n - a, n - b) - std::conj(values_(a, b))));
  return e;
}

double QuasiCharacteristic::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_.flat()) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------

WignerEvaluator::WignerEvaluator(const DensityMatrix& rho) : grid_(rho.grid()) {
  const std::size_t n = grid_.n();
  Array2<cd> rows(n, 2 * n);
  for (std::size_t a = 0; a < n; ++a) {
    auto f = upsample(rho.elements().row(a));
    std::copy(f.begin(), f.end(), rows.row(a).begin());
  }
  fine_ = Array2<cd>(2 * n, 2 * n);
  std::vector<cd> col(n);
  for (std::size_t b = 0; b < 2 * n; ++b) {
    for (std::size_t a = 0; a < n; ++a) col[a] = rows(a, b);
    auto f = upsample(col);
    for (std::size_t a = 0; a < 2 * n; ++a) fine_(a, b) = f[a];
  }
}

double WignerEvaluator::operator()(double k, std::size_t iq) const {
  // W(K, Q) = (1/pi) int du exp(-2iKu) rho(Q+u, Q-u), u on the half-step lattice.
  const long n2 = static_cast<long>(2 * grid_.n());
  const long c = static_cast<long>(2 * iq);
  const long pmax = std::min(c, n2 - 1 - c);
  cd s = 0.0;
  for (long p = -pmax; p <= pmax; ++p)
    s += std::exp(cd(0.0, -k * static_cast<double>(p) * grid_.dx())) *
         fine_(static_cast<std::size_t>(c + p), static_cast<std::size_t>(c - p));
  return s.real() * grid_.dx() / (2.0 * kPi);
}

std::vector<double> WignerEvaluator::column(std::size_t iq, double* imaginary_residue) const {
  const std::size_t n = grid_.n();
  const long n2 = static_cast<long>(2 * n);
  const long c = static_cast<long>(2 * iq);
  const long pmax = std::min(c, n2 - 1 - c);
  std::vector<cd> g(n, cd(0.0));
  for (long p = -pmax; p <= pmax; ++p) {
    const auto r = static_cast<std::size_t>(((p % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n));
    const cd v = fine_(static_cast<std::size_t>(c + p), static_cast<std::size_t>(c - p));
    g[r] += (p % 2 == 0) ? v : -v;
  }
  fft(g, FftSign::Minus);
  std::vector<double> out(n);
  double resid = 0.0;
  const double scale = grid_.dx() / (2.0 * kPi);
  for (std::size_t m = 0; m < n; ++m) {
    out[m] = g[m].real() * scale;
    resid = std::max(resid, std::abs(g[m].imag() * scale));
  }
  if (imaginary_residue != nullptr) *imaginary_residue = std::max(*imaginary_residue, resid);
  return out;
}

// ---------------------------------------------------------------------------

QuasiCharacteristic quasi_characteristic(const DensityMatrix& rho) {
  const Grid& g = rho.grid();
  const std::size_t n = g.n();
  Array2<cd> z(n, n);
  std::vector<cd> f(n);
  for (std::size_t p = 0; p < n; ++p) {
    const long s = static_cast<long>(p) - static_cast<long>(n / 2);
    const double q = g.position(p);
    for (std::size_t j = 0; j < n; ++j) {
      const long a = static_cast<long>(j) + s;
      f[j] = (a >= 0 && a < static_cast<long>(n)) ? rho(static_cast<std::size_t>(a), j) : cd(0.0);
    }
    centered_dft(f, FftSign::Plus);
    for (std::size_t m = 0; m < n; ++m)
      z(p, m) = f[m] * g.dx() * std::exp(cd(0.0, 0.5 * g.momentum(m) * q));
  }
  return QuasiCharacteristic(g, std::move(z));
}

WignerFunction wigner_transform(const DensityMatrix& rho) {
  const Grid& g = rho.grid();
  const std::size_t n = g.n();
  WignerEvaluator ev(rho);
  Array2<double> w(n, n);
  double resid = 0.0;
  for (std::size_t iq = 0; iq < n; ++iq) {
    const auto col = ev.column(iq, &resid);
    for (std::size_t ik = 0; ik < n; ++ik) w(ik, iq) = col[ik];
  }
  WignerFunction out(g, std::move(w));
  out.imaginary_residue = resid;
  return out;
}

QuasiCharacteristic to_quasi_characteristic(const WignerFunction& w) {
  const Grid& g = w.grid();
  const std::size_t n = g.n();
  Array2<cd> z(n, n);
  for (std::size_t i = 0; i < z.size(); ++i) z.flat()[i] = w.values().flat()[i];
  centered_dft_2d(z.flat(), n, n, FftSign::Plus);
  const double scale = g.dx() * g.dk();
  for (auto& v : z.flat()) v *= scale;
  return QuasiCharacteristic(g, std::move(z));
}

WignerFunction to_wigner(const QuasiCharacteristic& zc) {
  const Grid& g = zc.grid();
  const std::size_t n = g.n();
  Array2<cd> z = zc.values();
  centered_dft_2d(z.flat(), n, n, FftSign::Minus);
  const double scale = g.dx() * g.dk() / (4.0 * kPi * kPi);
  Array2<double> w(n, n);
  double resid = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    w.flat()[i] = z.flat()[i].real() * scale;
    resid = std::max(resid, std::abs(z.flat()[i].imag() * scale));
  }
  WignerFunction out(g, std::move(w));
  out.imaginary_residue = resid;
  return out;
}

InverseWignerResult inverse_wigner(const WignerFunction& w) {
  const Grid& g = w.grid();
  const std::size_t n = g.n();
  const auto zc = to_quasi_characteristic(w);
  Array2<cd> rho(n, n, cd(0.0));
  std::vector<cd> f(n);
  for (std::size_t p = 0; p < n; ++p) {
    const long s = static_cast<long>(p) - static_cast<long>(n / 2);
    const double q = g.position(p);
    for (std::size_t m = 0; m < n; ++m) f[m] = zc(p, m) * std::exp(cd(0.0, -0.5 * g.momentum(m) * q));
    centered_dft(f, FftSign::Minus);
    const double scale = 1.0 / (static_cast<double>(n) * g.dx());
    for (std::size_t j = 0; j < n; ++j) {
      const long a = static_cast<long>(j) + s;
      if (a < 0 || a >= static_cast<long>(n)) continue;
      rho(static_cast<std::size_t>(a), j) = f[j] * scale;
      if (p == 0) rho(j, static_cast<std::size_t>(a)) = std::conj(f[j] * scale);
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const cd h = 0.5 * (rho(a, b) + std::conj(rho(b, a)));
      rho(a, b) = h;
      rho(b, a) = std::conj(h);
    }
  auto dm = DensityMatrix::unchecked(g, std::move(rho));
  const double lmin = dm.min_eigenvalue();
  return {std::move(dm), lmin, lmin >= -1e-8};
}

double gaussian_wigner_value(const GaussianState& g, double k, double q) {
  const Eigen::Vector2d d(q - g.mean()(0), k - g.mean()(1));
  const double det = g.covariance().determinant();
  if (det <= 0) throw ValidationError("gaussian wigner: singular covariance has no density");
  const Eigen::Matrix2d inv = g.covariance().inverse();
  return std::exp(-0.5 * d.dot(inv * d)) / (2.0 * kPi * std::sqrt(det));
}

WignerFunction gaussian_wigner(const Grid& grid, const GaussianState& g) {
  const std::size_t n = grid.n();
  Array2<double> w(n, n);
  for (std::size_t ik = 0; ik < n; ++ik)
    for (std::size_t iq = 0; iq < n; ++iq)
      w(ik, iq) = gaussian_wigner_value(g, grid.momentum(ik), grid.position(iq));
  return WignerFunction(grid, std::move(w));
}

MomentTable wigner_moments(const WignerFunction& w, int max_order) {
  if (max_order < 0 || max_order > 6) throw ValidationError("wigner moments: max_order must be in [0, 6]");
  const Grid& g = w.grid();
  const std::size_t n = g.n(), band = g.edge_band();
  const double cell = g.dx() * g.dk();
  MomentTable t;
  double edge_highest = 0.0;
  for (int a = 0; a <= max_order; ++a)
    for (int b = 0; a + b <= max_order; ++b) {
      double s = 0.0, edge = 0.0;
      for (std::size_t ik = 0; ik < n; ++ik)
        for (std::size_t iq = 0; iq < n; ++iq) {
          const double v = std::pow(g.position(iq), a) * std::pow(g.momentum(ik), b) * w(ik, iq) * cell;
          s += v;
          const bool on_edge = ik < band || iq < band || ik >= n - band || iq >= n - band;
          if (on_edge) edge += std::abs(v);
        }
      t.moments[{a, b}] = s;
      if (a + b == max_order) edge_highest = std::max(edge_highest, edge);
    }
  if (edge_highest > 1e-6) {
    std::ostringstream os;
    os << "order-" << max_order << " moments carry " << edge_highest << " from the lattice edge band";
    t.warnings.push_back(os.str());
  }
  return t;
}

ModeMoments wigner_mode_moments(const WignerFunction& w) {
  const auto t = wigner_moments(w, 2);
  const double norm = t.at(0, 0);
  ModeMoments m;
  m.mean << t.at(1, 0) / norm, t.at(0, 1) / norm;
  m.covariance(0, 0) = t.at(2, 0) / norm - m.mean(0) * m.mean(0);
  m.covariance(1, 1) = t.at(0, 2) / norm - m.mean(1) * m.mean(1);
  m.covariance(0, 1) = m.covariance(1, 0) = t.at(1, 1) / norm - m.mean(0) * m.mean(1);
  return m;
}

}  // namespace wigjoint
