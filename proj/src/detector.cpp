#include "wigjoint/detector.hpp"

#include <cmath>
#include <string>

#include "wigjoint/error.hpp"

namespace wigjoint {

cd gaussian_characteristic(const Eigen::VectorXd& v, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance) {
  return std::exp(cd(-0.5 * v.dot(covariance * v), v.dot(mean)));
}

double uncertainty_margin(const Eigen::MatrixXd& covariance) {
  const auto d = covariance.rows();
  Eigen::MatrixXcd m = covariance.cast<cd>();
  // Pairs are ordered (p, x) with [x, p] = i.
  for (Eigen::Index a = 0; a + 1 < d; a += 2) {
    m(a + 1, a) += cd(0.0, 0.5);
    m(a, a + 1) -= cd(0.0, 0.5);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

cd gridded_quasi_characteristic(const DensityMatrix& rho, long shift, double k) {
  const Grid& g = rho.grid();
  const long n = static_cast<long>(g.n());
  const double q = static_cast<double>(shift) * g.dx();
  cd s = 0.0;
  for (long j = std::max(0L, -shift); j < std::min(n, n - shift); ++j) {
    const double x = g.position(static_cast<std::size_t>(j));
    s += std::exp(cd(0.0, k * x)) * rho(static_cast<std::size_t>(j + shift), static_cast<std::size_t>(j));
  }
  return s * g.dx() * std::exp(cd(0.0, 0.5 * k * q));
}

cd mode_quasi_characteristic(const DetectorMode& mode, double chi, double i) {
  if (const auto* g = std::get_if<GaussianState>(&mode)) {
    // (x, p) = (Phi, I)
    const Eigen::Vector2d v(i, chi);
    return std::exp(cd(-0.5 * v.dot(g->covariance() * v), v.dot(g->mean())));
  }
  const auto& rho = std::get<DensityMatrix>(mode);
  const double steps = chi / rho.grid().dx();
  const long shift = std::lround(steps);
  if (std::abs(steps - static_cast<double>(shift)) > 1e-9)
    throw ValidationError("detector: chi = " + std::to_string(chi) + " is off the pointer lattice");
  return gridded_quasi_characteristic(rho, shift, i);
}

ModeMoments mode_moments(const DetectorMode& mode) {
  if (const auto* g = std::get_if<GaussianState>(&mode)) return g->moments();
  return std::get<DensityMatrix>(mode).moments();
}

bool mode_is_sharp(const DetectorMode& mode) {
  const auto* g = std::get_if<GaussianState>(&mode);
  return g != nullptr && g->covariance().isZero(0.0);
}

DetectorPairState DetectorPairState::product(DetectorMode q, DetectorMode k) {
  return DetectorPairState(Product{std::move(q), std::move(k)});
}

DetectorPairState DetectorPairState::joint(JointGaussian g) {
  if (!g.mean.allFinite() || !g.covariance.allFinite())
    throw ValidationError("joint detector: non-finite parameters");
  if ((g.covariance - g.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("joint detector: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(g.covariance);
  if (es.eigenvalues()(0) <= 0) throw ValidationError("joint detector: covariance not positive definite");
  for (int a = 0; a < 4; a += 2) {
    if (g.covariance.block<2, 2>(a, a).determinant() < 0.25 - 1e-12)
      throw ValidationError("joint detector: uncertainty condition violated for mode " +
                            std::string(a == 0 ? "Q" : "K"));
  }
  if (uncertainty_margin(g.covariance) < -1e-12)
    throw ValidationError("joint detector: covariance violates the two-mode uncertainty condition");
  return DetectorPairState(std::move(g));
}

DetectorPairState DetectorPairState::vacuum() {
  return product(GaussianState::vacuum(), GaussianState::vacuum());
}

DetectorPairState DetectorPairState::squeezed(double s) {
  return product(GaussianState::squeezed_detector(s), GaussianState::squeezed_detector(s));
}

DetectorPairState DetectorPairState::sharp() {
  return product(GaussianState::sharp_detector(), GaussianState::sharp_detector());
}

bool DetectorPairState::is_gaussian() const {
  if (is_joint_gaussian()) return true;
  const auto& p = std::get<Product>(rep_);
  return std::holds_alternative<GaussianState>(p.q) && std::holds_alternative<GaussianState>(p.k);
}

bool DetectorPairState::is_gridded() const {
  if (!is_product()) return false;
  const auto& p = std::get<Product>(rep_);
  return std::holds_alternative<DensityMatrix>(p.q) || std::holds_alternative<DensityMatrix>(p.k);
}

bool DetectorPairState::is_sharp() const {
  if (!is_product()) return false;
  const auto& p = std::get<Product>(rep_);
  return mode_is_sharp(p.q) && mode_is_sharp(p.k);
}

const DetectorMode& DetectorPairState::mode(Axis a) const {
  const auto* p = std::get_if<Product>(&rep_);
  if (p == nullptr) throw ValidationError("detector: joint Gaussian has no separate modes");
  return a == Axis::Q ? p->q : p->k;
}

JointGaussian DetectorPairState::moments() const {
  if (is_joint_gaussian()) return joint_gaussian();
  JointGaussian out;
  out.covariance.setZero();
  const auto& p = std::get<Product>(rep_);
  int offset = 0;
  for (const DetectorMode* m : {&p.q, &p.k}) {
    const ModeMoments mm = mode_moments(*m);
    // reorder (Phi, I) -> (I, Phi)
    out.mean(offset) = mm.mean(1);
    out.mean(offset + 1) = mm.mean(0);
    out.covariance(offset, offset) = mm.covariance(1, 1);
    out.covariance(offset + 1, offset + 1) = mm.covariance(0, 0);
    out.covariance(offset, offset + 1) = out.covariance(offset + 1, offset) = mm.covariance(0, 1);
    offset += 2;
  }
  return out;
}

cd DetectorPairState::quasi_characteristic(double chi_q, double i_q, double chi_k, double i_k) const {
  if (const auto* j = std::get_if<JointGaussian>(&rep_)) {
    const Eigen::Vector4d v(chi_q, i_q, chi_k, i_k);
    return std::exp(cd(-0.5 * v.dot(j->covariance * v), v.dot(j->mean)));
  }
  const auto& p = std::get<Product>(rep_);
  return mode_quasi_characteristic(p.q, chi_q, i_q) * mode_quasi_characteristic(p.k, chi_k, i_k);
}

}  // namespace wigjoint
