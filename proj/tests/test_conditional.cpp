#include <gtest/gtest.h>

#include <cmath>

#include "wigjoint/conditional.hpp"
#include "wigjoint/error.hpp"

using namespace wigjoint;

namespace {

Grid g32() { return symmetric_grid(32); }
DensityMatrix fock(const Grid& g, int m) { return density_from_pure(fock_state(g, m)); }

}  // namespace

TEST(Conditional, gaussian_stays_gaussian) {
  const Grid g = g32();
  const auto cw = conditional_wigner(wigner_transform(fock(g, 0)), DetectorPairState::vacuum(), 0.0, 0.0);
  ASSERT_FALSE(cw.below_floor);
  const auto r = gaussianity_diagnostic(cw);
  EXPECT_LT(std::abs(r.excess_kurtosis_q), 1e-6);
  EXPECT_LT(std::abs(r.excess_kurtosis_k), 1e-6);
  EXPECT_LT(r.negativity, 1e-12);
  EXPECT_NEAR(cw.wigner.integral(), 1.0, 1e-12);
}

TEST(Conditional, fock_one_is_not_gaussian) {
  const Grid g = g32();
  const auto det = DetectorPairState::vacuum();
  const auto c1 = conditional_wigner(wigner_transform(fock(g, 1)), det, 0.3, 0.2);
  const auto c0 = conditional_wigner(wigner_transform(fock(g, 0)), det, 0.3, 0.2);
  const auto r = gaussianity_diagnostic(c1);
  EXPECT_GT(std::abs(r.excess_kurtosis_q) + std::abs(r.excess_kurtosis_k), 1e-3);
  EXPECT_GT(max_abs_diff(c1.wigner.values(), c0.wigner.values()), 1e-3);
}

TEST(Conditional, weight_is_joint_probability) {
  const Grid g = g32();
  const auto rho = fock(g, 1);
  const auto det = DetectorPairState::squeezed(0.7);
  const auto pi = joint_probability(wigner_transform(rho), det);
  const std::size_t iq = 18, ik = 13;
  const auto cw = conditional_wigner(wigner_transform(rho), det, g.position(iq), g.momentum(ik));
  const auto cz = conditional_quasi_characteristic(quasi_characteristic(rho), det, g.position(iq), g.momentum(ik));
  EXPECT_NEAR(cw.weight, pi(ik, iq), 1e-8);
  EXPECT_NEAR(cz.weight, pi(ik, iq), 1e-8);
  EXPECT_NEAR(cz.unnormalized.at_origin().imag(), 0.0, 1e-12);
}

TEST(Conditional, routes_agree) {
  // The Fourier route drops Z_S beyond the lattice edge; n=64 keeps that
  // loss below the tolerance.
  const Grid g = symmetric_grid(64);
  const auto det = DetectorPairState::product(GaussianState::squeezed_detector(0.8, 0.1, -0.2),
                                              GaussianState::squeezed_detector(1.2, 0.0, 0.3));
  for (const auto& rho : {fock(g, 0), fock(g, 1)}) {
    const auto cw = conditional_wigner(wigner_transform(rho), det, 0.4, -0.6);
    const auto cz = conditional_quasi_characteristic(quasi_characteristic(rho), det, 0.4, -0.6);
    EXPECT_LT(max_abs_diff(to_wigner(cz.normalized()).values(), cw.wigner.values()), 1e-7);
  }
}

TEST(Conditional, gridded_pointer_matches_gaussian) {
  const Grid g = g32();
  const auto gq = GaussianState::squeezed_detector(0.8);
  const auto gk = GaussianState::squeezed_detector(1.2);
  const auto analytic = DetectorPairState::product(gq, gk);
  const auto gridded = DetectorPairState::product(gaussian_density(g.conjugate(), gq), gaussian_density(g, gk));
  const auto ws = wigner_transform(fock(g, 1));
  const auto a = conditional_wigner(ws, analytic, 0.5, 0.5);
  const auto b = conditional_wigner(ws, gridded, 0.5, 0.5);
  EXPECT_LT(max_abs_diff(a.wigner.values(), b.wigner.values()), 1e-7);
}

TEST(Conditional, posterior_average_is_unconditional_state) {
  const Grid g = g32();
  for (const auto& rho : {fock(g, 0), fock(g, 1)}) {
    const auto c = posterior_consistency(rho, DetectorPairState::vacuum());
    EXPECT_LT(c.residual, 1e-7);
  }
}

TEST(Conditional, decoupled_detector_returns_prior) {
  // Pointers narrow in Phi around zero barely kick the system, and a very
  // wide readout leaves the prior almost unchanged at the mean outcome.
  const Grid g = symmetric_grid(64);
  const auto rho = fock(g, 1);
  const auto ws = wigner_transform(rho);
  const auto d = GaussianState::squeezed_detector(40.0);
  const auto cw = conditional_wigner(ws, DetectorPairState::product(d, d), 0.0, 0.0);
  EXPECT_LT(max_abs_diff(cw.wigner.values(), ws.values()), 5e-2);
}

TEST(Conditional, single_point_cell_matches_oracle) {
  const Grid g = g32();
  const auto rho = fock(g, 1);
  const auto det = DetectorPairState::product(GaussianState::squeezed_detector(0.7, 0.2, 0.1),
                                              GaussianState::squeezed_detector(1.0, -0.1, 0.0));
  const OutcomeCell cell{17, 17, 14, 14};
  const auto after = apply_interaction(compose(rho, det));
  double p = 0.0;
  const auto ref = wigner_transform(reduced_conditional_state(after, cell, &p));
  const auto cw = conditional_wigner(wigner_transform(rho), det, g.position(17), g.momentum(14));
  EXPECT_LT(max_abs_diff(cw.wigner.values(), ref.values()), 1e-6);
  EXPECT_NEAR(p / (g.dx() * g.dk()), cw.weight, 1e-6);
}

TEST(Conditional, cell_convergence_is_first_order) {
  // One-sided cells of width h grow away from the outcome at (iq, ik); the
  // cell average departs from the point value linearly in h. n=64 and wide
  // readout noise put h = dx, 2 dx inside the linear regime.
  const Grid g = symmetric_grid(64);
  const auto rho = fock(g, 1);
  const auto det = DetectorPairState::squeezed(4.0);
  const std::size_t iq = 33, ik = 31;
  const auto ws = wigner_transform(rho);
  const auto point = conditional_wigner(ws, det, g.position(iq), g.momentum(ik));
  const auto after = apply_interaction(compose(rho, det));
  std::vector<double> err;
  for (std::size_t m : {1u, 2u, 3u}) {
    const OutcomeCell cell{iq, iq + m - 1, ik, ik + m - 1};
    const auto ref = wigner_transform(reduced_conditional_state(after, cell));
    err.push_back(max_abs_diff(ref.values(), point.wigner.values()));
    EXPECT_LT(max_abs_diff(ref.values(), conditional_cell_average(ws, det, cell).wigner.values()), 1e-6);
  }
  EXPECT_LT(err[0], 1e-6);
  const double order = std::log(err[2] / err[1]) / std::log(2.0);
  EXPECT_NEAR(order, 1.0, 0.15);
}

TEST(Conditional, physical_states) {
  // At n=32 the lattice inverse transform itself reports about -1e-6 even for
  // oracle states, so the check runs on the larger box.
  const Grid g = symmetric_grid(64);
  const auto det = DetectorPairState::squeezed(0.5);
  for (const auto& rho : {fock(g, 1), density_from_pure(cat_state(g, 1.5))}) {
    const auto cw = conditional_wigner(wigner_transform(rho), det, 0.5, -0.5);
    EXPECT_GE(inverse_wigner(cw.wigner).min_eigenvalue, -1e-7);
  }
}

TEST(Conditional, narrow_pointers_match_oracle) {
  // Toward the sharp limit in I with finite width.
  const Grid g = symmetric_grid(64);
  const auto d = GaussianState::squeezed_detector(0.25);
  const auto det = DetectorPairState::product(d, d);
  const auto rho = fock(g, 1);
  const OutcomeCell cell{32, 32, 32, 32};
  const auto ref = wigner_transform(reduced_conditional_state(apply_interaction(compose(rho, det)), cell));
  const auto cw = conditional_wigner(wigner_transform(rho), det, 0.0, 0.0);
  EXPECT_LT(max_abs_diff(cw.wigner.values(), ref.values()), 1e-6);
}

TEST(Conditional, guards) {
  const Grid g = g32();
  const auto ws = wigner_transform(fock(g, 0));
  EXPECT_THROW(conditional_wigner(ws, DetectorPairState::sharp(), 0, 0), ValidationError);
  const auto far = conditional_wigner(ws, DetectorPairState::vacuum(), 6.5, 6.5);
  EXPECT_TRUE(far.below_floor);
  const auto fz = conditional_quasi_characteristic(quasi_characteristic(fock(g, 0)), DetectorPairState::vacuum(), 6.5, 6.5);
  EXPECT_TRUE(fz.below_floor);
  EXPECT_THROW(fz.normalized(), ValidationError);
}

TEST(Conditional, correlated_pointers) {
  const Grid g = g32();
  JointGaussian jg;
  jg.covariance = Eigen::Matrix4d::Identity();
  jg.covariance(0, 3) = jg.covariance(3, 0) = -0.125;
  const auto det = DetectorPairState::joint(jg);
  const auto rho = fock(g, 1);
  const auto cw = conditional_wigner(wigner_transform(rho), det, 0.2, 0.1);
  const auto cz = conditional_quasi_characteristic(quasi_characteristic(rho), det, 0.2, 0.1);
  EXPECT_LT(max_abs_diff(to_wigner(cz.normalized()).values(), cw.wigner.values()), 1e-7);
}

TEST(Conditional, zero_coupling_posterior_is_prior) {
  // Pointers localized at Phi = 0 never kick the system.
  const Grid g = g32();
  auto delta = [](const Grid& grid) {
    Array2<cd> e(grid.n(), grid.n());
    e(grid.n() / 2, grid.n() / 2) = 1.0 / grid.dx();
    return DensityMatrix(grid, std::move(e));
  };
  const auto det = DetectorPairState::product(delta(g.conjugate()), delta(g));
  for (const auto& rho : {fock(g, 1), density_from_pure(cat_state(g, 1.5))}) {
    const auto ws = wigner_transform(rho);
    EXPECT_LT(posterior_consistency(ws, det, ws).residual, 1e-12);
  }
}
