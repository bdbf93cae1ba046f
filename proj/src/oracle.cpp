#include "wigjoint/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "wigjoint/error.hpp"
#include "wigjoint/fft.hpp"

namespace wigjoint {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDropCutoff = 1e-12;

struct Factor {
  double weight;
  std::vector<cd> amplitudes;
};

// Pure components of a density matrix; dropped eigenvalues above roundoff
// are reported.
std::vector<Factor> split(const DensityMatrix& rho, const char* what, std::vector<std::string>& warnings) {
  std::vector<Factor> out;
  double kept = 0.0;
  for (auto& [w, psi] : rho.pure_components(kDropCutoff)) {
    kept += w;
    out.push_back({w, psi.amplitudes()});
  }
  if (out.empty()) throw ValidationError(std::string("oracle: ") + what + " has no component above the cutoff");
  double largest_dropped = 0.0;
  for (double e : rho.eigenvalues())
    if (e < kDropCutoff) largest_dropped = std::max(largest_dropped, e);
  if (largest_dropped > 1e-14) {
    std::ostringstream os;
    os << what << ": dropped eigenvalues below " << kDropCutoff << " (largest " << largest_dropped
       << "), weights renormalized";
    warnings.push_back(os.str());
  }
  for (auto& f : out) f.weight /= kept;
  return out;
}

std::vector<Factor> split_mode(const DetectorMode& mode, const Grid& grid, const char* what,
                               std::vector<std::string>& warnings) {
  if (const auto* g = std::get_if<GaussianState>(&mode)) {
    if (g->is_classical()) throw ValidationError(std::string("oracle: ") + what + " is a sharp pointer");
    return split(gaussian_density(grid, *g), what, warnings);
  }
  return split(std::get<DensityMatrix>(mode), what, warnings);
}

void fiber_fft(std::vector<cd>& a, std::size_t offset, std::size_t stride, std::size_t n, std::vector<cd>& buf,
               FftSign sign) {
  for (std::size_t i = 0; i < n; ++i) buf[i] = a[offset + i * stride];
  centered_dft(buf, sign);
  for (std::size_t i = 0; i < n; ++i) a[offset + i * stride] = buf[i];
}

// e^{i Phi_K K}: spectral shift of every system fiber.
void couple_k(const CompositeState& cs, std::vector<cd>& a) {
  const std::size_t ns = cs.system.n(), nq = cs.det_q.n(), nk = cs.det_k.n();
  std::vector<cd> buf(ns);
  std::vector<cd> phase(ns);
  const double inv = 1.0 / static_cast<double>(ns);
  for (std::size_t pk = 0; pk < nk; ++pk) {
    const double phi = cs.det_k.position(pk);
    for (std::size_t m = 0; m < ns; ++m) phase[m] = std::exp(cd(0.0, phi * cs.system.momentum(m))) * inv;
    for (std::size_t pq = 0; pq < nq; ++pq) {
      const std::size_t off = cs.index(0, pq, pk);
      for (std::size_t x = 0; x < ns; ++x) buf[x] = a[off + x * nq * nk];
      centered_dft(buf, FftSign::Minus);
      for (std::size_t m = 0; m < ns; ++m) buf[m] *= phase[m];
      centered_dft(buf, FftSign::Plus);
      for (std::size_t x = 0; x < ns; ++x) a[off + x * nq * nk] = buf[x];
    }
  }
}

// e^{i Phi_Q Q}
void couple_q(const CompositeState& cs, std::vector<cd>& a) {
  for (std::size_t x = 0; x < cs.system.n(); ++x)
    for (std::size_t pq = 0; pq < cs.det_q.n(); ++pq) {
      const cd ph = std::exp(cd(0.0, cs.det_q.position(pq) * cs.system.position(x)));
      for (std::size_t pk = 0; pk < cs.det_k.n(); ++pk) a[cs.index(x, pq, pk)] *= ph;
    }
}

void detector_phase(const CompositeState& cs, std::vector<cd>& a, double sign) {
  for (std::size_t x = 0; x < cs.system.n(); ++x)
    for (std::size_t pq = 0; pq < cs.det_q.n(); ++pq)
      for (std::size_t pk = 0; pk < cs.det_k.n(); ++pk)
        a[cs.index(x, pq, pk)] *= std::exp(cd(0.0, sign * 0.5 * cs.det_q.position(pq) * cs.det_k.position(pk)));
}

}  // namespace

double CompositeState::norm(std::size_t c) const {
  double s = 0.0;
  for (const cd& v : components[c].amplitudes) s += std::norm(v);
  return s * system.dx() * det_q.dx() * det_k.dx();
}

std::vector<cd> render_joint_gaussian(const Grid& det_q, const Grid& det_k, const JointGaussian& g) {
  // x = (Phi_Q, Phi_K), p = (I_Q, I_K)
  const Eigen::Matrix4d& s = g.covariance;
  if (std::abs(s.determinant() - 1.0 / 16.0) > 1e-9)
    throw ValidationError("oracle: correlated detectors must form a pure two-mode Gaussian (det Sigma = 1/16)");
  Eigen::Matrix2d sxx, sxp;
  sxx << s(1, 1), s(1, 3), s(3, 1), s(3, 3);
  sxp << s(1, 0), s(1, 2), s(3, 0), s(3, 2);
  const Eigen::Vector2d xbar(g.mean(1), g.mean(3));
  const Eigen::Vector2d pbar(g.mean(0), g.mean(2));
  const Eigen::Matrix2d inv = sxx.inverse();
  const Eigen::Matrix2d gm = 0.5 * inv;
  Eigen::Matrix2d h = inv * sxp;
  h = 0.5 * (h + h.transpose()).eval();
  std::vector<cd> out(det_q.n() * det_k.n());
  double mass = 0.0;
  for (std::size_t pq = 0; pq < det_q.n(); ++pq)
    for (std::size_t pk = 0; pk < det_k.n(); ++pk) {
      const Eigen::Vector2d d = Eigen::Vector2d(det_q.position(pq), det_k.position(pk)) - xbar;
      const cd v = std::exp(cd(-0.5 * d.dot(gm * d), 0.5 * d.dot(h * d) + pbar.dot(d)));
      out[pq * det_k.n() + pk] = v;
      mass += std::norm(v);
    }
  mass *= det_q.dx() * det_k.dx();
  const double exact = 2.0 * kPi * std::sqrt(sxx.determinant());
  if (std::abs(mass / exact - 1.0) > 1e-10)
    throw ValidationError("oracle: correlated detector state clipped by the pointer lattices");
  const double scale = 1.0 / std::sqrt(mass);
  for (auto& v : out) v *= scale;
  return out;
}

CompositeState compose(const DensityMatrix& system, const DetectorPairState& det) {
  CompositeState cs{system.grid(), system.grid().conjugate(), system.grid(), {}, {}};
  check_detector_lattices(cs.system, det);
  const std::vector<Factor> sys = split(system, "system", cs.warnings);

  std::vector<Factor> pair;
  if (det.is_joint_gaussian()) {
    pair.push_back({1.0, render_joint_gaussian(cs.det_q, cs.det_k, det.joint_gaussian())});
  } else {
    const auto fq = split_mode(det.mode(Axis::Q), cs.det_q, "Q pointer", cs.warnings);
    const auto fk = split_mode(det.mode(Axis::K), cs.det_k, "K pointer", cs.warnings);
    for (const auto& a : fq)
      for (const auto& b : fk) {
        Factor f{a.weight * b.weight, std::vector<cd>(cs.det_q.n() * cs.det_k.n())};
        for (std::size_t pq = 0; pq < cs.det_q.n(); ++pq)
          for (std::size_t pk = 0; pk < cs.det_k.n(); ++pk)
            f.amplitudes[pq * cs.det_k.n() + pk] = a.amplitudes[pq] * b.amplitudes[pk];
        pair.push_back(std::move(f));
      }
  }
  if (sys.size() * pair.size() > kMaxComponents) {
    std::ostringstream os;
    os << "oracle: " << sys.size() * pair.size() << " pure components exceed the limit of " << kMaxComponents;
    throw ValidationError(os.str());
  }
  const std::size_t nd = cs.det_q.n() * cs.det_k.n();
  for (const auto& s : sys)
    for (const auto& d : pair) {
      CompositeComponent c{s.weight * d.weight, std::vector<cd>(cs.system.n() * nd)};
      for (std::size_t x = 0; x < cs.system.n(); ++x)
        for (std::size_t j = 0; j < nd; ++j) c.amplitudes[x * nd + j] = s.amplitudes[x] * d.amplitudes[j];
      cs.components.push_back(std::move(c));
    }
  return cs;
}

CompositeState apply_interaction(const CompositeState& cs, Ordering order) {
  CompositeState out = cs;
  for (auto& c : out.components) {
    switch (order) {
      case Ordering::Simultaneous:
        detector_phase(out, c.amplitudes, +1.0);
        couple_k(out, c.amplitudes);
        couple_q(out, c.amplitudes);
        break;
      case Ordering::KFirst:
        couple_k(out, c.amplitudes);
        couple_q(out, c.amplitudes);
        break;
      case Ordering::QFirst:
        couple_q(out, c.amplitudes);
        couple_k(out, c.amplitudes);
        break;
    }
  }
  return out;
}

double bch_factorization_residual(const CompositeState& cs) {
  const CompositeState a = apply_interaction(cs, Ordering::Simultaneous);
  CompositeState b = cs;
  double r = 0.0;
  for (std::size_t i = 0; i < b.components.size(); ++i) {
    auto& v = b.components[i].amplitudes;
    detector_phase(b, v, -1.0);
    couple_q(b, v);
    couple_k(b, v);
    for (std::size_t j = 0; j < v.size(); ++j) r = std::max(r, std::abs(v[j] - a.components[i].amplitudes[j]));
  }
  return r;
}


namespace {

// Pointer axes from Phi to I: psi(I) = (2 pi)^{-1/2} sum dPhi e^{-i I Phi} psi(Phi).
std::vector<cd> outcome_representation(const CompositeState& cs, const std::vector<cd>& a) {
  const std::size_t ns = cs.system.n(), nq = cs.det_q.n(), nk = cs.det_k.n();
  std::vector<cd> out = a;
  std::vector<cd> bq(nq), bk(nk);
  for (std::size_t x = 0; x < ns; ++x) {
    for (std::size_t pq = 0; pq < nq; ++pq) fiber_fft(out, cs.index(x, pq, 0), 1, nk, bk, FftSign::Minus);
    for (std::size_t pk = 0; pk < nk; ++pk) fiber_fft(out, cs.index(x, 0, pk), nk, nq, bq, FftSign::Minus);
  }
  const double scale = cs.det_q.dx() * cs.det_k.dx() / (2.0 * kPi);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace

JointDistribution born_joint_distribution(const CompositeState& cs) {
  const std::size_t ns = cs.system.n(), nq = cs.det_q.n(), nk = cs.det_k.n();
  Array2<double> pi(nk, nq);
  for (const auto& c : cs.components) {
    const std::vector<cd> o = outcome_representation(cs, c.amplitudes);
    for (std::size_t x = 0; x < ns; ++x)
      for (std::size_t iq = 0; iq < nq; ++iq)
        for (std::size_t ik = 0; ik < nk; ++ik) pi(ik, iq) += c.weight * std::norm(o[cs.index(x, iq, ik)]);
  }
  for (auto& v : pi.flat()) v *= cs.system.dx();
  return JointDistribution(cs.system, std::move(pi), Route::Oracle);
}

DensityMatrix reduced_system_state(const CompositeState& cs) {
  const std::size_t ns = cs.system.n();
  const std::size_t nd = cs.det_q.n() * cs.det_k.n();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
  for (const auto& c : cs.components) {
    Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        c.amplitudes.data(), static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nd));
    rho += c.weight * cs.det_q.dx() * cs.det_k.dx() * (m * m.adjoint());
  }
  Array2<cd> e(ns, ns);
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < ns; ++b)
      e(a, b) = 0.5 * (rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +
                       std::conj(rho(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a))));
  return DensityMatrix(cs.system, std::move(e));
}

DensityMatrix reduced_conditional_state(const CompositeState& cs, const OutcomeCell& cell, double* cell_probability) {
  const std::size_t ns = cs.system.n(), nq = cs.det_q.n(), nk = cs.det_k.n();
  if (cell.iq_lo > cell.iq_hi || cell.ik_lo > cell.ik_hi || cell.iq_hi >= nq || cell.ik_hi >= nk)
    throw ValidationError("oracle: outcome cell out of range");
  Array2<cd> rho(ns, ns);
  const double measure = cs.system.dx() * cs.system.dk();  // dI_Q dI_K
  for (const auto& c : cs.components) {
    const std::vector<cd> o = outcome_representation(cs, c.amplitudes);
    for (std::size_t iq = cell.iq_lo; iq <= cell.iq_hi; ++iq)
      for (std::size_t ik = cell.ik_lo; ik <= cell.ik_hi; ++ik)
        for (std::size_t a = 0; a < ns; ++a) {
          const cd va = c.weight * measure * o[cs.index(a, iq, ik)];
          for (std::size_t b = 0; b < ns; ++b) rho(a, b) += va * std::conj(o[cs.index(b, iq, ik)]);
        }
  }
  double p = 0.0;
  for (std::size_t a = 0; a < ns; ++a) p += rho(a, a).real();
  p *= cs.system.dx();
  if (cell_probability != nullptr) *cell_probability = p;
  if (p < 1e-12) {
    std::ostringstream os;
    os << "oracle: outcome cell probability " << p << " is below 1e-12";
    throw ValidationError(os.str());
  }
  Array2<cd> e(ns, ns);
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < ns; ++b) e(a, b) = 0.5 * (rho(a, b) + std::conj(rho(b, a))) / p;
  return DensityMatrix(cs.system, std::move(e));
}

// ---------------------------------------------------------------------------

JointDistribution MonteCarloResult::empirical(const Grid& grid) const {
  Array2<double> v = counts;
  const double scale = 1.0 / (static_cast<double>(samples) * grid.dx() * grid.dk());
  for (auto& x : v.flat()) x *= scale;
  return JointDistribution(grid, std::move(v), Route::Oracle);
}

namespace {

template <int N>
Eigen::Matrix<double, N, N> sampling_factor(const Eigen::Matrix<double, N, N>& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(cov);
  Eigen::Matrix<double, N, 1> sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * sd.asDiagonal();
}

JointGaussian gaussian_detectors(const DetectorPairState& det) {
  if (!det.is_gaussian()) throw ValidationError("classical sampler: detectors must be Gaussian");
  return det.moments();
}

// Runs the trajectory equations for system draws supplied by `draw`.
template <typename Draw>
MonteCarloResult run_trajectories(const Grid& grid, const JointGaussian& d, std::uint64_t samples, std::mt19937_64& rng,
                                  Draw draw) {
  const Eigen::Matrix4d ld = sampling_factor<4>(d.covariance);
  std::normal_distribution<double> normal;
  const std::size_t n = grid.n();
  MonteCarloResult r;
  r.counts = Array2<double>(n, n);
  r.samples = samples;
  Eigen::Vector2d post = Eigen::Vector2d::Zero();
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Eigen::Vector2d qk = draw();
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z(i) = normal(rng);
    const Eigen::Vector4d v = d.mean + ld * z;  // I_Q', Phi_Q', I_K', Phi_K'
    const double iq = qk(0) + v(0) - 0.5 * v(3);
    const double ik = qk(1) + v(2) + 0.5 * v(1);
    post += Eigen::Vector2d(qk(0) - v(3), qk(1) + v(1));
    const long cq = std::lround(iq / grid.dx()) + static_cast<long>(n / 2);
    const long ck = std::lround(ik / grid.dk()) + static_cast<long>(n / 2);
    if (cq < 0 || ck < 0 || cq >= static_cast<long>(n) || ck >= static_cast<long>(n)) {
      ++r.outside;
      continue;
    }
    r.counts(static_cast<std::size_t>(ck), static_cast<std::size_t>(cq)) += 1.0;
  }
  r.post_system_mean = post / static_cast<double>(samples);
  return r;
}

}  // namespace

MonteCarloResult classical_monte_carlo(const GaussianState& system, const DetectorPairState& det, const Grid& grid,
                                       std::uint64_t samples, std::uint64_t seed) {
  const JointGaussian d = gaussian_detectors(det);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Matrix2d ls = sampling_factor<2>(system.covariance());
  return run_trajectories(grid, d, samples, rng, [&] {
    const Eigen::Vector2d z(normal(rng), normal(rng));
    return Eigen::Vector2d(system.mean() + ls * z);
  });
}

MonteCarloResult classical_monte_carlo(const WignerFunction& system, const DetectorPairState& det,
                                       std::uint64_t samples, std::uint64_t seed) {
  const JointGaussian d = gaussian_detectors(det);
  const Grid& g = system.grid();
  const double floor = -1e-12 * std::max(1.0, system.max_abs());
  if (system.min() < floor) {
    std::ostringstream os;
    os << "classical sampler: input Wigner function is negative (min " << system.min() << ")";
    throw ValidationError(os.str());
  }
  std::vector<double> w(system.values().flat().begin(), system.values().flat().end());
  for (auto& v : w) v = std::max(v, 0.0);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> cell(w.begin(), w.end());
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  const std::size_t n = g.n();
  return run_trajectories(g, d, samples, rng, [&] {
    const std::size_t c = cell(rng);
    const double q = g.position(c % n) + jitter(rng) * g.dx();
    const double k = g.momentum(c / n) + jitter(rng) * g.dk();
    return Eigen::Vector2d(q, k);
  });
}

BandCheck multinomial_bands(const MonteCarloResult& mc, const Array2<double>& p) {
  // Cells expecting fewer than 5 counts are pooled into one tail bin, where
  // the normal approximation to the binomial is again adequate.
  BandCheck b;
  std::size_t outside = 0;
  const double n = static_cast<double>(mc.samples);
  double pool_p = 0.0, pool_count = 0.0;
  auto test = [&](double pi, double count) {
    const double sigma = std::sqrt(n * pi * (1.0 - pi));
    const double z = std::abs(count - n * pi) / sigma;
    ++b.cells;
    if (z > 3.0) ++outside;
    b.max_abs_z = std::max(b.max_abs_z, z);
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::clamp(p.flat()[i], 0.0, 1.0);
    const double count = mc.counts.flat()[i];
    if (n * pi < 5.0) {
      pool_p += pi;
      pool_count += count;
    } else {
      test(pi, count);
    }
  }
  // outcomes that fell off the lattice belong to the tail as well
  pool_count += static_cast<double>(mc.outside);
  if (n * pool_p >= 5.0) {
    test(pool_p, pool_count);
  } else {
    b.pooled_excess = pool_count;
  }
  b.fraction_outside_3sigma = b.cells == 0 ? 0.0 : static_cast<double>(outside) / static_cast<double>(b.cells);
  return b;
}

}  // namespace wigjoint
