#include "wigjoint/state.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <string>

#include "wigjoint/error.hpp"

namespace wigjoint {
namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double edge_mass(const std::vector<double>& density, std::size_t band, double spacing) {
  const std::size_t n = density.size();
  double s = 0.0;
  for (std::size_t j = 0; j < band; ++j) s += density[j] + density[n - 1 - j];
  return s * spacing;
}

// Applies the momentum operator -i d/dx spectrally to a wavefunction sampled on `grid`.
std::vector<cd> apply_momentum(const Grid& grid, std::span<const cd> psi) {
  std::vector<cd> tmp(psi.begin(), psi.end());
  centered_dft(tmp, FftSign::Minus);
  for (std::size_t m = 0; m < tmp.size(); ++m) tmp[m] *= grid.momentum(m);
  centered_dft(tmp, FftSign::Plus);
  const double inv_n = 1.0 / static_cast<double>(tmp.size());
  for (auto& v : tmp) v *= inv_n;
  return tmp;
}

}  // namespace

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(Grid grid, std::vector<cd> amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != grid_.n())
    throw ValidationError("pure state: amplitude count does not match grid");
  const double nrm = norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw ValidationError("pure state: zero or non-finite norm");
  const double scale = 1.0 / std::sqrt(nrm);
  for (auto& a : amplitudes_) a *= scale;
}

double PureState::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes_) s += std::norm(a);
  return s * grid_.dx();
}

std::vector<cd> PureState::momentum_amplitudes() const {
  std::vector<cd> out = amplitudes_;
  centered_dft(out, FftSign::Minus);
  const double scale = grid_.dx() * kInvSqrt2Pi;
  for (auto& v : out) v *= scale;
  return out;
}

PureState PureState::from_momentum(Grid grid, std::vector<cd> momentum_amplitudes) {
  centered_dft(momentum_amplitudes, FftSign::Plus);
  const double scale = grid.dk() * kInvSqrt2Pi;
  for (auto& v : momentum_amplitudes) v *= scale;
  return PureState(grid, std::move(momentum_amplitudes));
}

double PureState::position_tail_mass() const {
  std::vector<double> d(amplitudes_.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = std::norm(amplitudes_[j]);
  return edge_mass(d, grid_.edge_band(), grid_.dx());
}

double PureState::momentum_tail_mass() const {
  const auto phi = momentum_amplitudes();
  std::vector<double> d(phi.size());
  for (std::size_t m = 0; m < d.size(); ++m) d[m] = std::norm(phi[m]);
  return edge_mass(d, grid_.edge_band(), grid_.dk());
}

ModeMoments PureState::moments() const { return density_from_pure(*this).moments(); }

void check_not_clipped(const PureState& psi, const char* what) {
  const double tq = psi.position_tail_mass();
  const double tk = psi.momentum_tail_mass();
  if (tq > kClipTolerance || tk > kClipTolerance)
  {
    std::ostringstream os;
    os << what << ": support clipped by grid (position tail " << tq << ", momentum tail " << tk << ")";
    throw ValidationError(os.str());
  }
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Grid grid, Array2<cd> elements)
    : DensityMatrix(grid, std::move(elements), true) {}

DensityMatrix DensityMatrix::unchecked(Grid grid, Array2<cd> elements) {
  return DensityMatrix(grid, std::move(elements), false);
}

DensityMatrix::DensityMatrix(Grid grid, Array2<cd> elements, bool validate)
    : grid_(grid), elements_(std::move(elements)) {
  if (elements_.rows() != grid_.n() || elements_.cols() != grid_.n())
    throw ValidationError("density matrix: shape does not match grid");
  if (!validate) return;
  double scale = 0.0;
  for (const auto& v : elements_.flat()) scale = std::max(scale, std::abs(v));
  if (hermiticity_error() > 1e-12 * std::max(1.0, scale))
    throw ValidationError("density matrix: not Hermitian");
  if (std::abs(trace() - 1.0) > 1e-10)
    throw ValidationError("density matrix: trace " + std::to_string(trace().real()) + " != 1");
  if (min_eigenvalue() < -1e-10) throw ValidationError("density matrix: not positive semidefinite");
}

cd DensityMatrix::trace() const {
  cd s = 0.0;
  for (std::size_t a = 0; a < grid_.n(); ++a) s += elements_(a, a);
  return s * grid_.dx();
}

double DensityMatrix::purity() const {
  double s = 0.0;
  for (const auto& v : elements_.flat()) s += std::norm(v);
  return s * grid_.dx() * grid_.dx();
}

double DensityMatrix::hermiticity_error() const {
  double e = 0.0;
  const std::size_t n = grid_.n();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      e = std::max(e, std::abs(elements_(a, b) - std::conj(elements_(b, a))));
  return e;
}

namespace {
Eigen::MatrixXcd operator_matrix(const Grid& grid, const Array2<cd>& el) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      // Hermitian part only; the anti-Hermitian residue is round-off.
      const cd v = 0.5 * (el(a, b) + std::conj(el(b, a)));
      m(a, b) = v * grid.dx();
    }
  return m;
}
}  // namespace

std::vector<double> DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(operator_matrix(grid_, elements_),
                                                     Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double DensityMatrix::min_eigenvalue() const { return eigenvalues().front(); }

std::vector<std::pair<double, PureState>> DensityMatrix::pure_components(double cutoff) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(operator_matrix(grid_, elements_));
  std::vector<std::pair<double, PureState>> out;
  const auto n = static_cast<Eigen::Index>(grid_.n());
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double w = es.eigenvalues()(i);
    if (w < cutoff) continue;
    std::vector<cd> amp(grid_.n());
    for (Eigen::Index a = 0; a < n; ++a) amp[a] = es.eigenvectors()(a, i);
    out.emplace_back(w, PureState(grid_, std::move(amp)));
  }
  return out;
}

std::vector<double> DensityMatrix::position_density() const {
  std::vector<double> d(grid_.n());
  for (std::size_t a = 0; a < grid_.n(); ++a) d[a] = elements_(a, a).real();
  return d;
}

Array2<cd> DensityMatrix::momentum_representation() const {
  const std::size_t n = grid_.n();
  Array2<cd> m = elements_;
  std::vector<cd> col(n);
  // rho~(k,k') = dx^2/(2 pi) sum_ab e^{-ik x_a} rho_ab e^{ik' x_b}
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t a = 0; a < n; ++a) col[a] = m(a, b);
    centered_dft(col, FftSign::Minus);
    for (std::size_t a = 0; a < n; ++a) m(a, b) = col[a];
  }
  for (std::size_t a = 0; a < n; ++a) centered_dft(m.row(a), FftSign::Plus);
  const double scale = grid_.dx() * grid_.dx() / (2.0 * std::numbers::pi);
  for (auto& v : m.flat()) v *= scale;
  return m;
}

std::vector<double> DensityMatrix::momentum_density() const {
  const auto m = momentum_representation();
  std::vector<double> d(grid_.n());
  for (std::size_t k = 0; k < grid_.n(); ++k) d[k] = m(k, k).real();
  return d;
}

ModeMoments DensityMatrix::moments() const {
  const std::size_t n = grid_.n();
  const double dx = grid_.dx();
  const auto pq = position_density();
  const auto pk = momentum_density();
  double mq = 0, mk = 0, qq = 0, kk = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid_.position(j), k = grid_.momentum(j);
    mq += x * pq[j] * dx;
    qq += x * x * pq[j] * dx;
    mk += k * pk[j] * grid_.dk();
    kk += k * k * pk[j] * grid_.dk();
  }
  // <QK> = Tr(Q K rho): apply K to each column of rho, then weight the diagonal by x.
  cd qk = 0.0;
  std::vector<cd> col(n);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t a = 0; a < n; ++a) col[a] = elements_(a, b);
    const auto kcol = apply_momentum(grid_, col);
    qk += grid_.position(b) * kcol[b] * dx;
  }
  ModeMoments m;
  m.mean << mq, mk;
  m.covariance(0, 0) = qq - mq * mq;
  m.covariance(1, 1) = kk - mk * mk;
  m.covariance(0, 1) = m.covariance(1, 0) = qk.real() - mq * mk;
  return m;
}

// ---------------------------------------------------------------------------
// GaussianState

GaussianState::GaussianState(Eigen::Vector2d mean, Eigen::Matrix2d covariance)
    : GaussianState(std::move(mean), std::move(covariance), false) {}

GaussianState GaussianState::classical(Eigen::Vector2d mean, Eigen::Matrix2d covariance) {
  return GaussianState(std::move(mean), std::move(covariance), true);
}

GaussianState::GaussianState(Eigen::Vector2d mean, Eigen::Matrix2d covariance, bool classical)
    : mean_(std::move(mean)), covariance_(std::move(covariance)), classical_(classical) {
  if (!mean_.allFinite() || !covariance_.allFinite())
    throw ValidationError("gaussian state: non-finite parameters");
  if (std::abs(covariance_(0, 1) - covariance_(1, 0)) > 1e-12)
    throw ValidationError("gaussian state: covariance not symmetric");
  const double det = covariance_.determinant();
  if (classical_) {
    if (covariance_(0, 0) < 0 || covariance_(1, 1) < 0 || det < -1e-14)
      throw ValidationError("gaussian state: covariance not positive semidefinite");
    return;
  }
  if (covariance_(0, 0) <= 0 || det <= 0)
    throw ValidationError("gaussian state: covariance not positive definite");
  if (det < 0.25 - 1e-12)
    throw ValidationError("gaussian state: uncertainty condition violated, det(cov) = " +
                          std::to_string(det) + " < 1/4");
}

GaussianState GaussianState::squeezed(double x0, double p0, double s) {
  if (!(s > 0)) throw ValidationError("gaussian state: squeeze must be positive");
  Eigen::Matrix2d cov;
  cov << s / 2.0, 0.0, 0.0, 1.0 / (2.0 * s);
  return GaussianState(Eigen::Vector2d(x0, p0), cov);
}

GaussianState GaussianState::detector(double mean_i, double mean_phi, double var_i, double var_phi,
                                      double cov_i_phi) {
  Eigen::Matrix2d cov;
  cov << var_phi, cov_i_phi, cov_i_phi, var_i;
  return GaussianState(Eigen::Vector2d(mean_phi, mean_i), cov);
}

GaussianState GaussianState::squeezed_detector(double s, double mean_i, double mean_phi) {
  if (!(s > 0)) throw ValidationError("gaussian state: squeeze must be positive");
  return detector(mean_i, mean_phi, s / 2.0, 1.0 / (2.0 * s));
}

// ---------------------------------------------------------------------------
// Constructors

PureState coherent_state(const Grid& grid, double q0, double k0, double squeeze) {
  if (!(squeeze > 0)) throw ValidationError("coherent state: squeeze must be positive");
  std::vector<cd> amp(grid.n());
  for (std::size_t j = 0; j < grid.n(); ++j) {
    const double x = grid.position(j);
    amp[j] = std::exp(cd(-(x - q0) * (x - q0) / (2.0 * squeeze), k0 * x));
  }
  PureState psi(grid, std::move(amp));
  check_not_clipped(psi, "coherent state");
  return psi;
}

PureState fock_state(const Grid& grid, int m) {
  if (m < 0) throw ValidationError("fock state: negative excitation number");
  const std::size_t n = grid.n();
  std::vector<cd> amp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.position(j);
    // Hermite-function recurrence, stable for moderate m.
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    for (int k = 0; k < m; ++k) {
      const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
      prev = cur;
      cur = next;
    }
    amp[j] = cur;
  }
  PureState psi(grid, std::move(amp));
  check_not_clipped(psi, "fock state");
  return psi;
}

PureState cat_state(const Grid& grid, double q0) {
  std::vector<cd> amp(grid.n());
  for (std::size_t j = 0; j < grid.n(); ++j) {
    const double x = grid.position(j);
    amp[j] = std::exp(-0.5 * (x - q0) * (x - q0)) + std::exp(-0.5 * (x + q0) * (x + q0));
  }
  PureState psi(grid, std::move(amp));
  check_not_clipped(psi, "cat state");
  return psi;
}

DensityMatrix density_from_pure(const PureState& psi) {
  const std::size_t n = psi.grid().n();
  const auto& a = psi.amplitudes();
  Array2<cd> el(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) el(i, j) = a[i] * std::conj(a[j]);
  return DensityMatrix::unchecked(psi.grid(), std::move(el));
}

DensityMatrix mix(const std::vector<std::pair<double, DensityMatrix>>& states) {
  if (states.empty()) throw ValidationError("mix: no states");
  double total = 0.0;
  for (const auto& [w, rho] : states) {
    if (w < 0) throw ValidationError("mix: negative weight");
    if (!rho.grid().same_as(states.front().second.grid())) throw ValidationError("mix: grid mismatch");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("mix: weights sum to " + std::to_string(total) + ", expected 1");
  const Grid& g = states.front().second.grid();
  Array2<cd> el(g.n(), g.n());
  for (const auto& [w, rho] : states)
    for (std::size_t i = 0; i < el.size(); ++i) el.flat()[i] += w * rho.elements().flat()[i];
  return DensityMatrix(g, std::move(el));
}

DensityMatrix gaussian_density(const Grid& grid, const GaussianState& g) {
  if (g.is_classical()) throw ValidationError("gaussian density: classical covariance has no density matrix");
  const auto& mu = g.mean();
  const auto& s = g.covariance();
  const double sxx = s(0, 0), sxp = s(0, 1);
  const double v = s.determinant() / sxx;
  const std::size_t n = grid.n();
  Array2<cd> el(n, n);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sxx);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double x = 0.5 * (grid.position(a) + grid.position(b));
      const double y = grid.position(a) - grid.position(b);
      const double dxm = x - mu(0);
      const double mp = mu(1) + sxp / sxx * dxm;
      el(a, b) = norm * std::exp(cd(-0.5 * dxm * dxm / sxx - 0.5 * y * y * v, y * mp));
    }
  auto rho = DensityMatrix::unchecked(grid, std::move(el));
  // Rendering a clipped Gaussian is an input error, not a numerical one.
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw ValidationError("gaussian density: support clipped by grid");
  return DensityMatrix(grid, rho.elements());
}

}  // namespace wigjoint
