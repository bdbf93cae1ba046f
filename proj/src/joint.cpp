#include "wigjoint/joint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wigjoint/error.hpp"
#include "wigjoint/fft.hpp"

namespace wigjoint {
namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

const char* route_name(Route r) {
  switch (r) {
    case Route::CharacteristicProduct: return "characteristic-product";
    case Route::WignerConvolution: return "wigner-convolution";
    case Route::Oracle: return "oracle";
  }
  return "?";
}

const char* ordering_name(Ordering o) {
  switch (o) {
    case Ordering::Simultaneous: return "simultaneous";
    case Ordering::KFirst: return "K-first";
    case Ordering::QFirst: return "Q-first";
  }
  return "?";
}

double Distribution1D::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * spacing;
}

double Distribution1D::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += points[i] * values[i];
  return s * spacing / integral();
}

double Distribution1D::variance() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += (points[i] - m) * (points[i] - m) * values[i];
  return s * spacing / integral();
}

// ---------------------------------------------------------------------------

JointDistribution::JointDistribution(Grid grid, Array2<double> values, Route provenance)
    : grid_(grid), values_(std::move(values)), provenance_(provenance) {
  if (values_.rows() != grid_.n() || values_.cols() != grid_.n())
    throw ValidationError("joint distribution: shape does not match grid");
}

double JointDistribution::integral() const {
  double s = 0.0;
  for (double v : values_.flat()) s += v;
  return s * grid_.dx() * grid_.dk();
}

double JointDistribution::min() const {
  return *std::min_element(values_.flat().begin(), values_.flat().end());
}

Distribution1D JointDistribution::marginal(Axis a) const {
  const std::size_t n = grid_.n();
  Distribution1D d;
  d.values.assign(n, 0.0);
  if (a == Axis::Q) {
    d.points = grid_.positions();
    d.spacing = grid_.dx();
    for (std::size_t ik = 0; ik < n; ++ik)
      for (std::size_t iq = 0; iq < n; ++iq) d.values[iq] += values_(ik, iq) * grid_.dk();
  } else {
    d.points = grid_.momenta();
    d.spacing = grid_.dk();
    for (std::size_t ik = 0; ik < n; ++ik)
      for (std::size_t iq = 0; iq < n; ++iq) d.values[ik] += values_(ik, iq) * grid_.dx();
  }
  return d;
}

OutcomeMoments JointDistribution::moments() const {
  const std::size_t n = grid_.n();
  double s0 = 0.0, sq = 0.0, sk = 0.0;
  for (std::size_t ik = 0; ik < n; ++ik)
    for (std::size_t iq = 0; iq < n; ++iq) {
      const double v = values_(ik, iq);
      s0 += v;
      sq += v * grid_.position(iq);
      sk += v * grid_.momentum(ik);
    }
  OutcomeMoments m;
  m.mean = Eigen::Vector2d(sq / s0, sk / s0);
  for (std::size_t ik = 0; ik < n; ++ik)
    for (std::size_t iq = 0; iq < n; ++iq) {
      const double v = values_(ik, iq) / s0;
      const double a = grid_.position(iq) - m.mean(0);
      const double b = grid_.momentum(ik) - m.mean(1);
      m.covariance(0, 0) += v * a * a;
      m.covariance(1, 1) += v * b * b;
      m.covariance(0, 1) += v * a * b;
    }
  m.covariance(1, 0) = m.covariance(0, 1);
  return m;
}

void JointDistribution::validate() const {
  const double lo = min();
  const double total = integral();
  if (lo < -1e-9 || std::abs(total - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "joint distribution (" << route_name(provenance_) << "): min " << lo << ", integral " << total;
    throw InvariantError(os.str());
  }
}

// ---------------------------------------------------------------------------

JointCharacteristic::JointCharacteristic(Grid grid, Array2<cd> system, Array2<cd> detector, Ordering ordering)
    : grid_(grid), system_(std::move(system)), detector_(std::move(detector)), total_(system_), ordering_(ordering) {
  if (system_.rows() != grid_.n() || system_.cols() != grid_.n() || detector_.rows() != grid_.n() ||
      detector_.cols() != grid_.n())
    throw ValidationError("joint characteristic: shape does not match grid");
  for (std::size_t i = 0; i < total_.size(); ++i) total_.flat()[i] *= detector_.flat()[i];
}

double JointCharacteristic::hermitian_symmetry_error() const {
  return QuasiCharacteristic(grid_, total_).hermitian_symmetry_error();
}

double JointCharacteristic::max_abs() const {
  double m = 0.0;
  for (const cd& v : total_.flat()) m = std::max(m, std::abs(v));
  return m;
}

Eigen::Vector4d detector_arguments(Ordering o, double chi_q, double chi_k) {
  switch (o) {
    case Ordering::Simultaneous: return {chi_q, 0.5 * chi_k, chi_k, -0.5 * chi_q};
    case Ordering::KFirst: return {chi_q, 0.0, chi_k, -chi_q};
    case Ordering::QFirst: return {chi_q, chi_k, chi_k, 0.0};
  }
  return Eigen::Vector4d::Zero();
}

void check_detector_lattices(const Grid& grid, const DetectorPairState& det) {
  if (!det.is_product()) return;
  const auto* q = std::get_if<DensityMatrix>(&det.mode(Axis::Q));
  if (q != nullptr && !q->grid().same_as(grid.conjugate()))
    throw ValidationError("incompatible lattices: the Q pointer must live on the conjugate of the system grid");
  const auto* k = std::get_if<DensityMatrix>(&det.mode(Axis::K));
  if (k != nullptr && !k->grid().same_as(grid))
    throw ValidationError("incompatible lattices: the K pointer must live on the system grid");
}

JointCharacteristic sequential_characteristic(const QuasiCharacteristic& zs, const DetectorPairState& det,
                                              Ordering order) {
  const Grid& g = zs.grid();
  check_detector_lattices(g, det);
  const std::size_t n = g.n();
  Array2<cd> d(n, n);
  for (std::size_t ik = 0; ik < n; ++ik) {
    const double chi_k = g.position(ik);
    for (std::size_t iq = 0; iq < n; ++iq) {
      const Eigen::Vector4d v = detector_arguments(order, g.momentum(iq), chi_k);
      d(ik, iq) = det.quasi_characteristic(v(0), v(1), v(2), v(3));
    }
  }
  return JointCharacteristic(g, zs.values(), std::move(d), order);
}

JointCharacteristic joint_characteristic(const QuasiCharacteristic& zs, const DetectorPairState& det) {
  return sequential_characteristic(zs, det, Ordering::Simultaneous);
}

JointDistribution joint_probability_from_characteristic(const JointCharacteristic& z) {
  const WignerFunction w = to_wigner(QuasiCharacteristic(z.grid(), z.values()));
  return JointDistribution(z.grid(), w.values(), Route::CharacteristicProduct);
}


namespace {

void fft_2d(Array2<cd>& a, FftSign sign) {
  std::vector<cd> col(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) fft(a.row(r), sign);
  for (std::size_t c = 0; c < a.cols(); ++c) {
    for (std::size_t r = 0; r < a.rows(); ++r) col[r] = a(r, c);
    fft(col, sign);
    for (std::size_t r = 0; r < a.rows(); ++r) a(r, c) = col[r];
  }
}

// Noise (I_Q' - Phi_K'/2, I_K' + Phi_Q'/2) added to the system's (Q, K).
Eigen::Matrix<double, 2, 4> noise_map() {
  Eigen::Matrix<double, 2, 4> a;
  a << 1.0, 0.0, 0.0, -0.5,
       0.0, 0.5, 1.0, 0.0;
  return a;
}

// Convolution of W_S with a Gaussian noise density on the periodic lattice,
// the boundary convention shared with the characteristic route and the
// oracle. Returns false if the noise is too narrow for the lattice to resolve.
bool convolve_gaussian_noise(const WignerFunction& ws, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                             Array2<double>& out) {
  const Grid& g = ws.grid();
  const long n = static_cast<long>(g.n());
  const double det = cov.determinant();
  if (!(det > 0.0)) return false;
  const Eigen::Matrix2d inv = cov.inverse();
  const double norm = 1.0 / (2.0 * kPi * std::sqrt(det));
  // kernel folded onto the periodic lattice, images out to two box lengths
  Array2<cd> noise(g.n(), g.n());
  double mass = 0.0;
  for (long b = -2 * n; b < 2 * n; ++b)
    for (long a = -2 * n; a < 2 * n; ++a) {
      const Eigen::Vector2d d(a * g.dx() - mean(0), b * g.dk() - mean(1));
      const double v = norm * std::exp(-0.5 * d.dot(inv * d));
      noise(static_cast<std::size_t>((b + 2 * n) % n), static_cast<std::size_t>((a + 2 * n) % n)) += v;
      mass += v;
    }
  mass *= g.dx() * g.dk();
  if (std::abs(mass - 1.0) > 1e-10) {
    const double narrowest = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues()(0));
    if (narrowest < 2.0 * std::max(g.dx(), g.dk())) return false;
    std::ostringstream os;
    os << "detector support clipped: noise mass on the lattice is " << mass;
    throw ValidationError(os.str());
  }
  Array2<cd> w(g.n(), g.n());
  for (std::size_t i = 0; i < w.size(); ++i) w.flat()[i] = ws.values().flat()[i];
  fft_2d(w, FftSign::Minus);
  fft_2d(noise, FftSign::Minus);
  for (std::size_t i = 0; i < w.size(); ++i) w.flat()[i] *= noise.flat()[i];
  fft_2d(w, FftSign::Plus);
  const double scale = g.dx() * g.dk() / static_cast<double>(g.n() * g.n());
  out = Array2<double>(g.n(), g.n());
  for (std::size_t i = 0; i < out.size(); ++i) out.flat()[i] = w.flat()[i].real() * scale;
  return true;
}

// Transform of a gridded pointer's Wigner function along I, indexed
// [chi][Phi]; chi runs over the centered lattice conjugate to I.
Array2<cd> pointer_transform(const DensityMatrix& rho) {
  const WignerFunction w = wigner_transform(rho);
  const Grid& g = rho.grid();
  const std::size_t n = g.n();
  Array2<cd> out(n, n);
  std::vector<cd> f(n);
  for (std::size_t ip = 0; ip < n; ++ip) {
    for (std::size_t ii = 0; ii < n; ++ii) f[ii] = w(ii, ip);
    centered_dft(f, FftSign::Plus);
    for (std::size_t c = 0; c < n; ++c) out(c, ip) = f[c] * g.dk();
  }
  return out;
}

// Detector factor of the simultaneous ordering built from the pointer Wigner
// functions. The Phi/2 half-shifts enter as phases in the Phi sums.
Array2<cd> detector_factor_from_wigner(const Grid& g, const DetectorPairState& det) {
  const std::size_t n = g.n();
  Array2<cd> f(n, n);
  for (auto& v : f.flat()) v = 1.0;

  const DetectorMode& mq = det.mode(Axis::Q);
  if (const auto* rho = std::get_if<DensityMatrix>(&mq)) {
    const Grid& gq = rho->grid();
    const Array2<cd> hat = pointer_transform(*rho);
    for (std::size_t ik = 0; ik < n; ++ik)
      for (std::size_t iq = 0; iq < n; ++iq) {
        cd s = 0.0;
        for (std::size_t ip = 0; ip < n; ++ip)
          s += hat(iq, ip) * std::exp(cd(0.0, 0.5 * g.position(ik) * gq.position(ip)));
        f(ik, iq) *= s * gq.dx();
      }
  } else {
    for (std::size_t ik = 0; ik < n; ++ik)
      for (std::size_t iq = 0; iq < n; ++iq)
        f(ik, iq) *= mode_quasi_characteristic(mq, g.momentum(iq), 0.5 * g.position(ik));
  }

  const DetectorMode& mk = det.mode(Axis::K);
  if (const auto* rho = std::get_if<DensityMatrix>(&mk)) {
    const Array2<cd> hat = pointer_transform(*rho);
    for (std::size_t ik = 0; ik < n; ++ik)
      for (std::size_t iq = 0; iq < n; ++iq) {
        cd s = 0.0;
        for (std::size_t ip = 0; ip < n; ++ip)
          s += hat(ik, ip) * std::exp(cd(0.0, -0.5 * g.momentum(iq) * g.position(ip)));
        f(ik, iq) *= s * g.dx();
      }
  } else {
    for (std::size_t ik = 0; ik < n; ++ik)
      for (std::size_t iq = 0; iq < n; ++iq)
        f(ik, iq) *= mode_quasi_characteristic(mk, g.position(ik), -0.5 * g.momentum(iq));
  }
  return f;
}

}  // namespace

JointDistribution joint_probability(const WignerFunction& ws, const DetectorPairState& det) {
  const Grid& g = ws.grid();
  check_detector_lattices(g, det);
  if (det.is_sharp()) return JointDistribution(g, ws.values(), Route::WignerConvolution);

  if (det.is_gaussian()) {
    const JointGaussian jg = det.moments();
    const Eigen::Matrix<double, 2, 4> a = noise_map();
    Array2<double> out;
    if (convolve_gaussian_noise(ws, a * jg.mean, a * jg.covariance * a.transpose(), out))
      return JointDistribution(g, std::move(out), Route::WignerConvolution);
  }

  Array2<cd> f(g.n(), g.n());
  if (det.is_joint_gaussian()) {
    for (std::size_t ik = 0; ik < g.n(); ++ik)
      for (std::size_t iq = 0; iq < g.n(); ++iq) {
        const Eigen::Vector4d v = detector_arguments(Ordering::Simultaneous, g.momentum(iq), g.position(ik));
        f(ik, iq) = det.quasi_characteristic(v(0), v(1), v(2), v(3));
      }
  } else {
    f = detector_factor_from_wigner(g, det);
  }
  Array2<cd> z = to_quasi_characteristic(ws).values();
  for (std::size_t i = 0; i < z.size(); ++i) z.flat()[i] *= f.flat()[i];
  const WignerFunction pi = to_wigner(QuasiCharacteristic(g, std::move(z)));
  return JointDistribution(g, pi.values(), Route::WignerConvolution);
}


OutcomeMoments outcome_moments(const ModeMoments& system, const DetectorPairState& det) {
  const JointGaussian d = det.moments();
  const Eigen::Matrix<double, 2, 4> a = noise_map();
  OutcomeMoments m;
  m.mean = system.mean + a * d.mean;
  m.covariance = system.covariance + a * d.covariance * a.transpose();
  return m;
}

Eigen::Vector2d outcome_means(const ModeMoments& system, const DetectorPairState& det) {
  return outcome_moments(system, det).mean;
}

Eigen::Vector2d outcome_variances(const ModeMoments& system, const DetectorPairState& det) {
  return outcome_moments(system, det).covariance.diagonal();
}

// ---------------------------------------------------------------------------

std::vector<double> fd_weights(const std::vector<double>& x, int order) {
  // Fornberg's recursion, evaluated at 0.
  const std::size_t np = x.size();
  const int m = order;
  std::vector<std::vector<double>> c(np, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = x[0];
  for (std::size_t i = 1; i < np; ++i) {
    const int mn = std::min(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(np);
  for (std::size_t i = 0; i < np; ++i) w[i] = c[i][static_cast<std::size_t>(m)];
  return w;
}

namespace {

// log Z on a (2R+1)^2 patch around the origin, continued along the path
// origin -> (0, j) -> (i, j). A point is invalid once the path meets
// |Z| < 1e-12 or a phase step above pi/2.
struct LogPatch {
  long radius = 0;
  Array2<cd> value;
  Array2<int> valid;

  cd at(long i, long j) const { return value(static_cast<std::size_t>(i + radius), static_cast<std::size_t>(j + radius)); }
  bool ok(long i, long j) const {
    return valid(static_cast<std::size_t>(i + radius), static_cast<std::size_t>(j + radius)) != 0;
  }
};

LogPatch log_patch(const Array2<cd>& z, long radius) {
  const long c = static_cast<long>(z.rows() / 2);
  auto zz = [&](long i, long j) { return z(static_cast<std::size_t>(c + i), static_cast<std::size_t>(c + j)); };
  const std::size_t side = static_cast<std::size_t>(2 * radius + 1);
  LogPatch p{radius, Array2<cd>(side, side), Array2<int>(side, side)};
  auto set = [&](long i, long j, cd v, bool ok) {
    p.value(static_cast<std::size_t>(i + radius), static_cast<std::size_t>(j + radius)) = v;
    p.valid(static_cast<std::size_t>(i + radius), static_cast<std::size_t>(j + radius)) = ok ? 1 : 0;
  };
  auto step = [&](long i0, long j0, long i1, long j1) {
    const cd from = zz(i0, j0);
    const cd to = zz(i1, j1);
    bool ok = p.ok(i0, j0) && std::abs(to) >= 1e-12;
    cd inc = 0.0;
    if (ok) {
      inc = std::log(to / from);
      ok = std::abs(inc.imag()) <= kPi / 2;
    }
    set(i1, j1, p.at(i0, j0) + inc, ok);
  };
  set(0, 0, std::log(zz(0, 0)), std::abs(zz(0, 0)) >= 1e-12);
  for (long j = 1; j <= radius; ++j) {
    step(0, j - 1, 0, j);
    step(0, -j + 1, 0, -j);
  }
  for (long j = -radius; j <= radius; ++j)
    for (long i = 1; i <= radius; ++i) {
      step(i - 1, j, i, j);
      step(-i + 1, j, -i, j);
    }
  return p;
}

long stencil_radius(int order) { return (order + 1) / 2; }

std::vector<double> central_weights(int order) {
  const long r = stencil_radius(order);
  std::vector<double> x;
  for (long i = -r; i <= r; ++i) x.push_back(static_cast<double>(i));
  return fd_weights(x, order);
}

bool stencil_ok(const std::vector<const LogPatch*>& patches, int a, int b, long scale) {
  const long ra = stencil_radius(a) * scale;
  const long rb = stencil_radius(b) * scale;
  for (const LogPatch* p : patches) {
    if (ra > p->radius || rb > p->radius) return false;
    for (long i = -rb; i <= rb; i += scale)
      for (long j = -ra; j <= ra; j += scale)
        if (!p->ok(i, j)) return false;
  }
  return true;
}

// d^{a+b} log Z / d chi_Q^a d chi_K^b on the stencil of the given scale.
cd mixed_derivative(const LogPatch& p, int a, int b, long scale, double h_q, double h_k) {
  const std::vector<double> wa = central_weights(a);
  const std::vector<double> wb = central_weights(b);
  const long ra = stencil_radius(a);
  const long rb = stencil_radius(b);
  cd s = 0.0;
  for (long i = -rb; i <= rb; ++i)
    for (long j = -ra; j <= ra; ++j)
      s += wb[static_cast<std::size_t>(i + rb)] * wa[static_cast<std::size_t>(j + ra)] * p.at(i * scale, j * scale);
  return s / (std::pow(h_q * static_cast<double>(scale), a) * std::pow(h_k * static_cast<double>(scale), b));
}

}  // namespace

CumulantTable cumulants(const JointCharacteristic& z, int max_order) {
  if (max_order < 1 || max_order > 6) throw ValidationError("cumulants: max_order must be in 1..6");
  const Grid& g = z.grid();
  const long radius = std::min<long>(2 * stencil_radius(max_order), static_cast<long>(g.n() / 2) - 1);
  const LogPatch ls = log_patch(z.system_factor(), radius);
  const LogPatch ld = log_patch(z.detector_factor(), radius);
  const LogPatch lt = log_patch(z.values(), radius);
  const std::vector<const LogPatch*> all{&ls, &ld, &lt};
  const double h_q = g.dk();  // chi_Q runs over the momentum lattice
  const double h_k = g.dx();

  CumulantTable t;
  t.max_order = max_order;
  for (int order = 1; order <= max_order; ++order)
    for (int a = order; a >= 0; --a) {
      const int b = order - a;
      std::ostringstream tag;
      tag << "kappa_" << a << b;
      const cd phase = std::pow(cd(0.0, -1.0), order);
      CumulantEntry e;
      auto eval = [&](const LogPatch& p) {
        if (stencil_ok(all, a, b, 2))
          return (phase * (4.0 * mixed_derivative(p, a, b, 1, h_q, h_k) - mixed_derivative(p, a, b, 2, h_q, h_k)) /
                  3.0)
              .real();
        return (phase * mixed_derivative(p, a, b, 1, h_q, h_k)).real();
      };
      if (!stencil_ok(all, a, b, 1)) {
        t.warnings.push_back(tag.str() + ": log Z undefined on the stencil (zero or phase jump); not reported");
        const double nan = std::numeric_limits<double>::quiet_NaN();
        e = {nan, nan, nan};
      } else {
        if (!stencil_ok(all, a, b, 2))
          t.warnings.push_back(tag.str() + ": Richardson stencil hits a zero or phase jump of Z; using spacing h only");
        e = {eval(ls), eval(ld), eval(lt)};
        if (std::abs(e.total - e.system - e.detector) > 1e-6 * std::max(1.0, std::abs(e.total)))
          throw InvariantError("cumulants: " + tag.str() + " total differs from system + detector");
      }
      t.entries[{a, b}] = e;
    }
  return t;
}

// ---------------------------------------------------------------------------

Distribution1D single_measurement(const DensityMatrix& rho, const DetectorMode& detector, Axis which) {
  const Grid& g = rho.grid();
  const std::size_t n = g.n();
  Distribution1D d;
  std::vector<double> marginal;
  if (which == Axis::Q) {
    d.points = g.positions();
    d.spacing = g.dx();
    marginal = rho.position_density();
  } else {
    d.points = g.momenta();
    d.spacing = g.dk();
    marginal = rho.momentum_density();
  }
  d.values.assign(n, 0.0);

  std::vector<double> kernel(2 * n - 1, 0.0);  // noise at offset (i - (n - 1)) * spacing
  if (const auto* gs = std::get_if<GaussianState>(&detector)) {
    const double mu = gs->mean()(1);
    const double var = gs->covariance()(1, 1);
    if (var <= 0.0) {
      const double steps = mu / d.spacing;
      const long shift = std::lround(steps);
      if (std::abs(steps - static_cast<double>(shift)) > 1e-9 || std::abs(shift) >= static_cast<long>(n))
        throw ValidationError("single measurement: sharp pointer offset is off the outcome lattice");
      kernel[static_cast<std::size_t>(shift + static_cast<long>(n) - 1)] = 1.0 / d.spacing;
    } else {
      for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double x = (static_cast<double>(i) - static_cast<double>(n - 1)) * d.spacing - mu;
        kernel[i] = std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * kPi * var);
      }
    }
  } else {
    const auto& pr = std::get<DensityMatrix>(detector);
    const Grid expected = which == Axis::Q ? g.conjugate() : g;
    if (!pr.grid().same_as(expected)) throw ValidationError("single measurement: incompatible pointer lattice");
    const std::vector<double> noise = pr.momentum_density();
    for (std::size_t m = 0; m < n; ++m) kernel[m + n / 2 - 1] = noise[m];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += marginal[j] * kernel[i + n - 1 - j];
    d.values[i] = s * d.spacing;
  }
  return d;
}

Distribution1D marginal_from_characteristic(const JointCharacteristic& z, Axis which) {
  const Grid& g = z.grid();
  const std::size_t n = g.n();
  std::vector<cd> f(n);
  Distribution1D d;
  if (which == Axis::Q) {
    for (std::size_t iq = 0; iq < n; ++iq) f[iq] = z(n / 2, iq);
    d.points = g.positions();
    d.spacing = g.dx();
  } else {
    for (std::size_t ik = 0; ik < n; ++ik) f[ik] = z(ik, n / 2);
    d.points = g.momenta();
    d.spacing = g.dk();
  }
  centered_dft(f, FftSign::Minus);
  const double scale = (which == Axis::Q ? g.dk() : g.dx()) / (2.0 * kPi);
  d.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.values[i] = f[i].real() * scale;
  return d;
}

ArthursKellyResult arthurs_kelly_scan(const GaussianState& system, double s_min, double s_max, std::size_t steps) {
  if (!(s_min > 0.0) || !(s_max > s_min) || steps < 3) throw ValidationError("arthurs-kelly scan: bad range");
  const ModeMoments sm = system.moments();
  ArthursKellyResult r;
  r.min_scanned = std::numeric_limits<double>::infinity();
  auto product = [&](double sq, double sk) {
    const DetectorPairState det =
        DetectorPairState::product(GaussianState::squeezed_detector(sq), GaussianState::squeezed_detector(sk));
    const Eigen::Vector2d v = outcome_variances(sm, det);
    ++r.evaluations;
    const double p = std::sqrt(v(0) * v(1));
    r.min_scanned = std::min(r.min_scanned, p);
    return p;
  };
  double lo_q = std::log(s_min), hi_q = std::log(s_max);
  double lo_k = lo_q, hi_k = hi_q;
  double best = std::numeric_limits<double>::infinity();
  double bq = 0.0, bk = 0.0;
  std::size_t m = steps;
  for (int round = 0; round < 40; ++round) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double lq = lo_q + (hi_q - lo_q) * static_cast<double>(i) / static_cast<double>(m - 1);
        const double lk = lo_k + (hi_k - lo_k) * static_cast<double>(j) / static_cast<double>(m - 1);
        const double p = product(std::exp(lq), std::exp(lk));
        if (p < best) {
          best = p;
          bq = lq;
          bk = lk;
        }
      }
    // zoom around the incumbent, staying inside the requested range
    const double wq = (hi_q - lo_q) / 4.0, wk = (hi_k - lo_k) / 4.0;
    lo_q = std::max(std::log(s_min), bq - wq);
    hi_q = std::min(std::log(s_max), bq + wq);
    lo_k = std::max(std::log(s_min), bk - wk);
    hi_k = std::min(std::log(s_max), bk + wk);
    m = 11;
  }
  r.min_product = best;
  r.s_q = std::exp(bq);
  r.s_k = std::exp(bk);
  return r;
}


Array2<double> cell_probabilities(const JointCharacteristic& z) {
  const Grid& g = z.grid();
  const std::size_t n = g.n();
  auto sinc = [](double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; };
  Array2<cd> v = z.values();
  for (std::size_t ik = 0; ik < n; ++ik)
    for (std::size_t iq = 0; iq < n; ++iq)
      v(ik, iq) *= sinc(0.5 * g.momentum(iq) * g.dx()) * sinc(0.5 * g.position(ik) * g.dk());
  const WignerFunction w = to_wigner(QuasiCharacteristic(g, std::move(v)));
  Array2<double> p = w.values();
  for (auto& x : p.flat()) x *= g.dx() * g.dk();
  return p;
}

}  // namespace wigjoint
