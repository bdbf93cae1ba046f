#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wigjoint/error.hpp"
#include "wigjoint/joint.hpp"

using namespace wigjoint;

namespace {

constexpr double kPi = std::numbers::pi;

Grid g32() { return symmetric_grid(32); }
DensityMatrix fock(const Grid& g, int m) { return density_from_pure(fock_state(g, m)); }

double husimi_fock1(double q, double k) {
  const double r2 = q * q + k * k;
  return r2 / 2 * std::exp(-r2 / 2) / (2 * kPi);
}

double max_diff(const JointDistribution& a, const JointDistribution& b) { return max_abs_diff(a.values(), b.values()); }

JointDistribution route_a(const DensityMatrix& rho, const DetectorPairState& det) {
  return joint_probability_from_characteristic(joint_characteristic(quasi_characteristic(rho), det));
}

JointDistribution route_b(const DensityMatrix& rho, const DetectorPairState& det) {
  return joint_probability(wigner_transform(rho), det);
}

// Two thermal-ish pointers (every variance 1) with <dI_Q dPhi_K> = -1/8.
DetectorPairState correlated_detectors() {
  JointGaussian jg;
  jg.covariance = Eigen::Matrix4d::Identity();
  jg.covariance(0, 3) = jg.covariance(3, 0) = -0.125;
  return DetectorPairState::joint(jg);
}

}  // namespace

TEST(JointCharacteristic, vacuum_closed_form) {
  const Grid g = g32();
  const auto z = joint_characteristic(quasi_characteristic(fock(g, 0)), DetectorPairState::vacuum());
  double err = 0.0;
  for (std::size_t ik = 0; ik < g.n(); ++ik)
    for (std::size_t iq = 0; iq < g.n(); ++iq) {
      const double ck = g.position(ik), cq = g.momentum(iq);
      err = std::max(err, std::abs(z(ik, iq) - std::exp(-9.0 / 16.0 * (ck * ck + cq * cq))));
    }
  EXPECT_LT(err, 1e-6);  // lattice truncation of the system factor
  EXPECT_NEAR(std::abs(z.at_origin() - 1.0), 0.0, 1e-10);
  EXPECT_LT(z.max_abs(), 1.0 + 1e-10);
  EXPECT_LT(z.hermitian_symmetry_error(), 1e-10);
}

TEST(JointCharacteristic, sharp_detectors_are_identity) {
  const Grid g = g32();
  const auto zs = quasi_characteristic(fock(g, 1));
  for (Ordering o : {Ordering::Simultaneous, Ordering::KFirst, Ordering::QFirst}) {
    const auto z = sequential_characteristic(zs, DetectorPairState::sharp(), o);
    EXPECT_EQ(max_abs_diff(z.values(), zs.values()), 0.0);
  }
}

TEST(JointCharacteristic, incompatible_pointer_lattice) {
  const Grid g = g32();
  const Grid other(32, 16.0);
  const auto det = DetectorPairState::product(GaussianState::vacuum(), fock(other, 0));
  EXPECT_THROW(joint_characteristic(quasi_characteristic(fock(g, 0)), det), ValidationError);
  EXPECT_THROW(joint_probability(wigner_transform(fock(g, 0)), det), ValidationError);
}

TEST(JointDistribution, routes_agree) {
  const Grid g = g32();
  for (int m : {0, 1}) {
    const auto a = route_a(fock(g, m), DetectorPairState::vacuum());
    const auto b = route_b(fock(g, m), DetectorPairState::vacuum());
    a.validate();
    b.validate();
    EXPECT_LT(max_diff(a, b), 1e-8) << "fock " << m;
  }
}

TEST(JointDistribution, gridded_pointers_match_closed_form) {
  const Grid g = g32();
  const auto gq = GaussianState::squeezed_detector(0.7, 0.3, -0.2);
  const auto gk = GaussianState::squeezed_detector(1.3, -0.1, 0.4);
  const auto analytic = DetectorPairState::product(gq, gk);
  const auto gridded = DetectorPairState::product(gaussian_density(g.conjugate(), gq), gaussian_density(g, gk));
  const auto rho = fock(g, 1);
  const auto ref = route_a(rho, analytic);
  EXPECT_LT(max_diff(ref, route_a(rho, gridded)), 1e-8);
  EXPECT_LT(max_diff(ref, route_b(rho, gridded)), 1e-8);
  EXPECT_LT(max_diff(ref, route_b(rho, analytic)), 1e-8);
}

TEST(JointDistribution, husimi_of_fock1) {
  const Grid g = g32();
  const auto pi = route_b(fock(g, 1), DetectorPairState::squeezed(0.5));
  double err = 0.0;
  for (std::size_t ik = 0; ik < g.n(); ++ik)
    for (std::size_t iq = 0; iq < g.n(); ++iq)
      err = std::max(err, std::abs(pi(ik, iq) - husimi_fock1(g.position(iq), g.momentum(ik))));
  EXPECT_LT(err, 1e-6);
  EXPECT_NEAR(pi(g.n() / 2, g.n() / 2), 0.0, 1e-6);
}

TEST(JointDistribution, positive_for_negative_wigner) {
  const Grid g = g32();
  const auto w = wigner_transform(fock(g, 3));
  ASSERT_LT(w.min(), -0.1);
  EXPECT_GE(joint_probability(w, DetectorPairState::vacuum()).min(), -1e-9);
}

TEST(JointDistribution, sharp_limit_is_wigner_for_gaussians) {
  const Grid g = g32();
  const auto rho = density_from_pure(coherent_state(g, 1.0, -0.5));
  const auto w = wigner_transform(rho);
  EXPECT_EQ(max_abs_diff(joint_probability(w, DetectorPairState::sharp()).values(), w.values()), 0.0);
  // Z_S is truncated at the lattice edge, so the two lattice Wigner functions differ slightly.
  EXPECT_LT(max_diff(route_a(rho, DetectorPairState::sharp()), JointDistribution(g, w.values(), Route::Oracle)),
            1e-6);
}

TEST(OutcomeMoments, mean_identities) {
  ModeMoments sys{{2.0, 0.0}, Eigen::Matrix2d::Identity() * 0.5};
  EXPECT_NEAR(outcome_means(sys, DetectorPairState::vacuum())(0), 2.0, 1e-15);
  sys.mean.setZero();
  const auto det = DetectorPairState::product(GaussianState::vacuum(), GaussianState::squeezed(1.0, 0.0, 1.0));
  EXPECT_NEAR(outcome_means(sys, det)(0), -0.5, 1e-15);
  EXPECT_NEAR(outcome_means(sys, det)(1), 0.0, 1e-15);
}

TEST(OutcomeMoments, variance_identities) {
  const ModeMoments vac{{0.0, 0.0}, Eigen::Matrix2d::Identity() * 0.5};
  EXPECT_NEAR(outcome_variances(vac, DetectorPairState::vacuum())(0), 9.0 / 8.0, 1e-15);
  const Eigen::Vector2d sq = outcome_variances(vac, DetectorPairState::squeezed(0.5));
  EXPECT_NEAR(sq(0), 1.0, 1e-15);
  EXPECT_NEAR(sq(1), 1.0, 1e-15);
  EXPECT_NEAR(outcome_variances(vac, correlated_detectors())(0), 15.0 / 8.0, 1e-15);
}

TEST(OutcomeMoments, identities_match_distribution) {
  // Second moments of the wider correlated noise need the n=64 box.
  const Grid g = symmetric_grid(64);
  const auto det = correlated_detectors();
  for (const auto& rho : {fock(g, 0), fock(g, 1), density_from_pure(coherent_state(g, 0.8, -0.4, 1.3))}) {
    const OutcomeMoments ref = outcome_moments(rho.moments(), det);
    for (const auto& pi : {route_a(rho, det), route_b(rho, det)}) {
      const OutcomeMoments m = pi.moments();
      EXPECT_LT((m.mean - ref.mean).cwiseAbs().maxCoeff(), 1e-7);
      EXPECT_LT((m.covariance - ref.covariance).cwiseAbs().maxCoeff(), 1e-7);
    }
  }
}

TEST(Cumulants, fd_weights_known_stencils) {
  const auto w1 = fd_weights({-1, 0, 1}, 1);
  EXPECT_NEAR(w1[0], -0.5, 1e-15);
  EXPECT_NEAR(w1[2], 0.5, 1e-15);
  const auto w4 = fd_weights({-2, -1, 0, 1, 2}, 4);
  EXPECT_NEAR(w4[0], 1.0, 1e-12);
  EXPECT_NEAR(w4[1], -4.0, 1e-12);
  EXPECT_NEAR(w4[2], 6.0, 1e-12);
}

TEST(Cumulants, gaussian_identities) {
  const Grid g = g32();
  const auto rho = density_from_pure(coherent_state(g, 0.7, -0.3, 1.2));
  const auto det = correlated_detectors();
  const auto t = cumulants(joint_characteristic(quasi_characteristic(rho), det), 4);
  const OutcomeMoments ref = outcome_moments(rho.moments(), det);
  EXPECT_NEAR(t.at(1, 0).total, ref.mean(0), 1e-7);
  EXPECT_NEAR(t.at(0, 1).total, ref.mean(1), 1e-7);
  EXPECT_NEAR(t.at(2, 0).total, ref.covariance(0, 0), 1e-7);
  EXPECT_NEAR(t.at(0, 2).total, ref.covariance(1, 1), 1e-7);
  EXPECT_NEAR(t.at(1, 1).total, ref.covariance(0, 1), 1e-7);
  EXPECT_NEAR(t.at(3, 0).total, 0.0, 1e-6);
}

TEST(Cumulants, vacuum_has_no_cross_cumulant) {
  const Grid g = g32();
  const auto t = cumulants(joint_characteristic(quasi_characteristic(fock(g, 0)), DetectorPairState::vacuum()), 2);
  EXPECT_NEAR(t.at(1, 1).total, 0.0, 1e-9);
}

TEST(Cumulants, gaussian_detectors_leave_higher_orders_alone) {
  const Grid g = g32();
  const auto rho = density_from_pure(coherent_state(g, 0.5, 0.0, 1.0));
  const auto cat = density_from_pure(cat_state(g, 1.5));
  const auto t = cumulants(joint_characteristic(quasi_characteristic(mix({{0.5, rho}, {0.5, cat}})),
                                                DetectorPairState::vacuum()),
                           3);
  ASSERT_FALSE(std::isnan(t.at(3, 0).total));
  EXPECT_GT(std::abs(t.at(3, 0).system), 1e-3);
  EXPECT_NEAR(t.at(3, 0).total, t.at(3, 0).system, 1e-6);
}

TEST(Cumulants, detector_part_independent_of_system) {
  const Grid g = g32();
  const auto det = DetectorPairState::squeezed(0.8);
  const auto a = cumulants(joint_characteristic(quasi_characteristic(fock(g, 0)), det), 4);
  const auto b = cumulants(joint_characteristic(quasi_characteristic(fock(g, 1)), det), 4);
  for (const auto& [key, e] : b.entries) {
    if (std::isnan(e.total)) continue;
    EXPECT_NEAR(e.total - e.system, a.at(key.first, key.second).total - a.at(key.first, key.second).system, 1e-6);
  }
}

TEST(Sequential, first_measurement_is_undisturbed) {
  const Grid g = g32();
  const auto rho = density_from_pure(cat_state(g, 1.0));
  const auto zs = quasi_characteristic(rho);
  const auto det = DetectorPairState::vacuum();
  const auto lt = sequential_characteristic(zs, det, Ordering::KFirst);
  const auto gt = sequential_characteristic(zs, det, Ordering::QFirst);
  EXPECT_GT(max_abs_diff(lt.values(), gt.values()), 1e-3);

  const auto sk = single_measurement(rho, det.mode(Axis::K), Axis::K);
  const auto sq = single_measurement(rho, det.mode(Axis::Q), Axis::Q);
  const auto mk = marginal_from_characteristic(lt, Axis::K);
  const auto mq = marginal_from_characteristic(gt, Axis::Q);
  for (std::size_t i = 0; i < g.n(); ++i) {
    EXPECT_NEAR(mk.values[i], sk.values[i], 1e-8);
    EXPECT_NEAR(mq.values[i], sq.values[i], 1e-8);
  }
  // the same marginal read off the full inversion
  const auto pm = joint_probability_from_characteristic(lt).marginal(Axis::K);
  for (std::size_t i = 0; i < g.n(); ++i) EXPECT_NEAR(pm.values[i], sk.values[i], 1e-8);
}

TEST(SingleMeasurement, limits) {
  const Grid g = g32();
  const auto v = single_measurement(fock(g, 0), GaussianState::vacuum(), Axis::Q);
  EXPECT_NEAR(v.integral(), 1.0, 1e-9);
  EXPECT_NEAR(v.variance(), 1.0, 1e-8);
  const auto rho = fock(g, 1);
  const auto s = single_measurement(rho, GaussianState::sharp_detector(), Axis::K);
  const auto p = rho.momentum_density();
  for (std::size_t i = 0; i < g.n(); ++i) EXPECT_NEAR(s.values[i], p[i], 1e-12);
  const auto gridded = single_measurement(rho, gaussian_density(g.conjugate(), GaussianState::vacuum()), Axis::Q);
  const auto closed = single_measurement(rho, GaussianState::vacuum(), Axis::Q);
  for (std::size_t i = 0; i < g.n(); ++i) EXPECT_NEAR(gridded.values[i], closed.values[i], 1e-9);
}

TEST(ArthursKelly, vacuum_bound) {
  const auto r = arthurs_kelly_scan(GaussianState::vacuum(), 0.05, 5.0);
  EXPECT_NEAR(r.min_product, 1.0, 1e-6);
  EXPECT_GE(r.min_scanned, 1.0 - 1e-9);
  EXPECT_NEAR(r.s_q, 0.5, 1e-2);
  EXPECT_NEAR(r.s_k, 0.5, 1e-2);
  const auto sq = arthurs_kelly_scan(GaussianState::squeezed(0.0, 0.0, 0.4), 0.05, 5.0);
  EXPECT_GE(sq.min_scanned, 1.0 - 1e-9);
}
