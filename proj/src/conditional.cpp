#include "wigjoint/conditional.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "wigjoint/error.hpp"

namespace wigjoint {
namespace {

constexpr double kPi = std::numbers::pi;

// Wigner function of one pointer, W(I, Phi_j) at arbitrary I.
class PointerWigner {
 public:
  explicit PointerWigner(const DetectorMode& mode, const Grid& grid) : grid_(grid) {
    if (const auto* g = std::get_if<GaussianState>(&mode)) {
      if (g->is_classical()) throw ValidationError("conditional state: sharp pointers have no finite-width Wigner function");
      gauss_ = *g;
    } else {
      eval_.emplace(std::get<DensityMatrix>(mode));
    }
  }
  double operator()(double i, std::size_t phi) const {
    if (gauss_) return gaussian_wigner_value(*gauss_, i, grid_.position(phi));
    return (*eval_)(i, phi);
  }

 private:
  Grid grid_;
  std::optional<GaussianState> gauss_;
  std::optional<WignerEvaluator> eval_;
};

class ConditionalKernel {
 public:
  ConditionalKernel(const Grid& g, const DetectorPairState& det) : g_(g), gq_(g.conjugate()) {
    check_detector_lattices(g, det);
    if (det.is_joint_gaussian()) {
      const JointGaussian& jg = det.joint_gaussian();
      mean_ = jg.mean;
      precision_ = jg.covariance.inverse();
      norm_ = 1.0 / (4.0 * kPi * kPi * std::sqrt(jg.covariance.determinant()));
    } else {
      wq_.emplace(det.mode(Axis::Q), gq_);
      wk_.emplace(det.mode(Axis::K), g_);
    }
  }

  bool factorized() const { return wq_.has_value(); }

  // aq(i, j, pq) = W_Q(I_Q - Q_i - Phi_K,j / 2, Phi_Q,pq), summed over the
  // given I_Q values; ak(m, pq, j) likewise for I_K.
  void tables(const std::vector<double>& i_q, const std::vector<double>& i_k, std::vector<double>& aq,
              std::vector<double>& ak) const {
    const std::size_t n = g_.n();
    aq.assign(n * n * n, 0.0);
    ak.assign(n * n * n, 0.0);
    for (double iq : i_q)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double a = iq - g_.position(i) - 0.5 * g_.position(j);
          for (std::size_t pq = 0; pq < n; ++pq) aq[(i * n + j) * n + pq] += (*wq_)(a, pq);
        }
    for (double ik : i_k)
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t pq = 0; pq < n; ++pq) {
          const double b = ik - g_.momentum(m) + 0.5 * gq_.position(pq);
          for (std::size_t j = 0; j < n; ++j) ak[(m * n + pq) * n + j] += (*wk_)(b, j);
        }
  }

  // Unnormalized conditional Wigner function at the outcome.
  Array2<double> evaluate(const WignerFunction& ws, double i_q, double i_k) const {
    std::vector<double> aq, ak;
    if (factorized()) tables({i_q}, {i_k}, aq, ak);
    return contract(ws, aq, ak, i_q, i_k);
  }

  // sum over W_S(K - Phi_Q, Q + Phi_K) times the detector factor
  Array2<double> contract(const WignerFunction& ws, const std::vector<double>& aq, const std::vector<double>& ak,
                          double i_q, double i_k) const {
    const std::size_t n = g_.n();
    const long h = static_cast<long>(n / 2);
    Array2<double> v(n, n);
    const bool joint = !factorized();
    const double measure = gq_.dx() * g_.dx();
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t pq = 0; pq < n; ++pq) {
          const long ks = static_cast<long>(m) - (static_cast<long>(pq) - h);
          if (ks < 0 || ks >= static_cast<long>(n)) continue;
          for (std::size_t j = 0; j < n; ++j) {
            const long qs = static_cast<long>(i) + (static_cast<long>(j) - h);
            if (qs < 0 || qs >= static_cast<long>(n)) continue;
            const double w = ws(static_cast<std::size_t>(ks), static_cast<std::size_t>(qs));
            if (w == 0.0) continue;
            double d;
            if (joint) {
              const Eigen::Vector4d x(i_q - g_.position(i) - 0.5 * g_.position(j), gq_.position(pq),
                                      i_k - g_.momentum(m) + 0.5 * gq_.position(pq), g_.position(j));
              const Eigen::Vector4d dv = x - mean_;
              d = norm_ * std::exp(-0.5 * dv.dot(precision_ * dv));
            } else {
              d = aq[(i * n + j) * n + pq] * ak[(m * n + pq) * n + j];
            }
            s += w * d;
          }
        }
        v(m, i) = s * measure;
      }
    return v;
  }

 private:
  Grid g_;
  Grid gq_;
  std::optional<PointerWigner> wq_, wk_;
  Eigen::Vector4d mean_ = Eigen::Vector4d::Zero();
  Eigen::Matrix4d precision_ = Eigen::Matrix4d::Identity();
  double norm_ = 0.0;
};

double lattice_integral(const Array2<double>& v, const Grid& g) {
  double s = 0.0;
  for (double x : v.flat()) s += x;
  return s * g.dx() * g.dk();
}

ConditionalWigner finish(const Grid& g, Array2<double> v, double i_q, double i_k) {
  const double weight = lattice_integral(v, g);
  const bool low = !(weight >= kWeightFloor);
  if (!low)
    for (auto& x : v.flat()) x /= weight;
  return ConditionalWigner{i_q, i_k, WignerFunction(g, std::move(v)), weight, low};
}

}  // namespace

QuasiCharacteristic ConditionalCharacteristic::normalized() const {
  if (below_floor) throw ValidationError("conditional characteristic: weight below the floor, cannot normalize");
  Array2<cd> z = unnormalized.values();
  for (auto& v : z.flat()) v /= weight;
  return QuasiCharacteristic(unnormalized.grid(), std::move(z));
}

ConditionalWigner conditional_wigner(const WignerFunction& ws, const DetectorPairState& det, double i_q, double i_k) {
  const ConditionalKernel kernel(ws.grid(), det);
  return finish(ws.grid(), kernel.evaluate(ws, i_q, i_k), i_q, i_k);
}

namespace {

// Z_S(q, k) with q = s dx, s in [-(n-1), n-1] (ZS row s + n - 1) and k on the
// momentum lattice; arguments outside are zero.
ConditionalCharacteristic conditional_from_table(const Grid& g, const DetectorPairState& det, const Array2<cd>& zs,
                                                 double i_q, double i_k) {
  check_detector_lattices(g, det);
  const std::size_t n = g.n();
  const long h = static_cast<long>(n / 2);
  const long smax = static_cast<long>(zs.rows() / 2);
  auto z_sys = [&](long s, long m) -> cd {
    if (s < -smax || s > smax || m < -h || m >= h) return 0.0;
    return zs(static_cast<std::size_t>(s + smax), static_cast<std::size_t>(m + h));
  };
  Array2<cd> out(n, n);
  const double measure = g.dk() * g.dx() / (4.0 * kPi * kPi);  // dchi_Q dchi_K / (2 pi)^2
  for (std::size_t iq = 0; iq < n; ++iq)
    for (std::size_t ik = 0; ik < n; ++ik) {
      const long sq = static_cast<long>(iq) - h;
      const long sk = static_cast<long>(ik) - h;
      const double q = g.position(iq), k = g.momentum(ik);
      cd s = 0.0;
      for (std::size_t cq = 0; cq < n; ++cq) {
        const double chi_q = g.momentum(cq);
        const long mk = sk + static_cast<long>(cq) - h;
        for (std::size_t ck = 0; ck < n; ++ck) {
          const cd zsv = z_sys(sq + static_cast<long>(ck) - h, mk);
          if (zsv == 0.0) continue;
          const double chi_k = g.position(ck);
          const cd d = det.quasi_characteristic(chi_q, q + 0.5 * chi_k, chi_k, -k - 0.5 * chi_q);
          s += std::exp(cd(0.0, -(chi_q * i_q + chi_k * i_k))) * zsv * d;
        }
      }
      out(iq, ik) = s * measure;
    }
  ConditionalCharacteristic c{i_q, i_k, QuasiCharacteristic(g, std::move(out)), 0.0, false};
  c.weight = c.unnormalized.at_origin().real();
  c.below_floor = !(c.weight >= kWeightFloor);
  return c;
}

}  // namespace

ConditionalCharacteristic conditional_quasi_characteristic(const QuasiCharacteristic& zs, const DetectorPairState& det,
                                                           double i_q, double i_k) {
  const std::size_t n = zs.grid().n();
  Array2<cd> t(n + 1, n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t m = 0; m < n; ++m) t(p, m) = zs(p, m);
  return conditional_from_table(zs.grid(), det, t, i_q, i_k);
}

ConditionalCharacteristic conditional_quasi_characteristic(const DensityMatrix& rho, const DetectorPairState& det,
                                                           double i_q, double i_k) {
  const Grid& g = rho.grid();
  const std::size_t n = g.n();
  Array2<cd> t(2 * n - 1, n);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t m = 0; m < n; ++m)
      t(r, m) = gridded_quasi_characteristic(rho, static_cast<long>(r) - static_cast<long>(n - 1), g.momentum(m));
  return conditional_from_table(g, det, t, i_q, i_k);
}

ConditionalWigner conditional_cell_average(const WignerFunction& ws, const DetectorPairState& det,
                                           const OutcomeCell& cell) {
  const Grid& g = ws.grid();
  if (cell.iq_lo > cell.iq_hi || cell.ik_lo > cell.ik_hi || cell.iq_hi >= g.n() || cell.ik_hi >= g.n())
    throw ValidationError("conditional state: outcome cell out of range");
  const ConditionalKernel kernel(g, det);
  Array2<double> acc(g.n(), g.n());
  if (kernel.factorized()) {
    std::vector<double> iqs, iks, aq, ak;
    for (std::size_t iq = cell.iq_lo; iq <= cell.iq_hi; ++iq) iqs.push_back(g.position(iq));
    for (std::size_t ik = cell.ik_lo; ik <= cell.ik_hi; ++ik) iks.push_back(g.momentum(ik));
    kernel.tables(iqs, iks, aq, ak);
    acc = kernel.contract(ws, aq, ak, 0.0, 0.0);
  } else {
    for (std::size_t iq = cell.iq_lo; iq <= cell.iq_hi; ++iq)
      for (std::size_t ik = cell.ik_lo; ik <= cell.ik_hi; ++ik) {
        const Array2<double> v = kernel.evaluate(ws, g.position(iq), g.momentum(ik));
        for (std::size_t i = 0; i < acc.size(); ++i) acc.flat()[i] += v.flat()[i];
      }
  }
  const double iq_mid = 0.5 * (g.position(cell.iq_lo) + g.position(cell.iq_hi));
  const double ik_mid = 0.5 * (g.momentum(cell.ik_lo) + g.momentum(cell.ik_hi));
  return finish(g, std::move(acc), iq_mid, ik_mid);
}

PosteriorCheck posterior_consistency(const WignerFunction& ws, const DetectorPairState& det,
                                     const WignerFunction& reference) {
  const Grid& g = ws.grid();
  if (!reference.grid().same_as(g)) throw ValidationError("posterior consistency: reference grid mismatch");
  const ConditionalKernel kernel(g, det);
  Array2<double> acc(g.n(), g.n());
  if (kernel.factorized()) {
    // sum_I V(I) = contraction with the outcome-summed pointer tables
    std::vector<double> aq, ak;
    kernel.tables(g.positions(), g.momenta(), aq, ak);
    acc = kernel.contract(ws, aq, ak, 0.0, 0.0);
  } else {
    for (std::size_t iq = 0; iq < g.n(); ++iq)
      for (std::size_t ik = 0; ik < g.n(); ++ik) {
        const Array2<double> v = kernel.evaluate(ws, g.position(iq), g.momentum(ik));
        for (std::size_t i = 0; i < acc.size(); ++i) acc.flat()[i] += v.flat()[i];
      }
  }
  for (auto& x : acc.flat()) x *= g.dx() * g.dk();
  PosteriorCheck r{WignerFunction(g, std::move(acc)), 0.0};
  r.residual = max_abs_diff(r.posterior_average.values(), reference.values());
  return r;
}

PosteriorCheck posterior_consistency(const DensityMatrix& rho, const DetectorPairState& det) {
  const WignerFunction reference = wigner_transform(reduced_system_state(apply_interaction(compose(rho, det))));
  return posterior_consistency(wigner_transform(rho), det, reference);
}

GaussianityReport gaussianity_diagnostic(const WignerFunction& w) {
  GaussianityReport r;
  auto moments = [](const std::vector<double>& p, const std::vector<double>& x, double& mean, double& var) {
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      s0 += p[i];
      s1 += p[i] * x[i];
    }
    mean = s1 / s0;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = x[i] - mean;
      m2 += p[i] * d * d;
      m4 += p[i] * d * d * d * d;
    }
    m2 /= s0;
    m4 /= s0;
    var = m2;
    return m4 / (m2 * m2) - 3.0;
  };
  const Grid& g = w.grid();
  r.excess_kurtosis_q = moments(w.position_marginal(), g.positions(), r.mean_q, r.var_q);
  r.excess_kurtosis_k = moments(w.momentum_marginal(), g.momenta(), r.mean_k, r.var_k);
  r.negativity = w.negativity();
  return r;
}

}  // namespace wigjoint
