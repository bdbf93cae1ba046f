#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "wigjoint/conditional.hpp"
#include "wigjoint/error.hpp"
#include "wigjoint/scenario.hpp"

using namespace wigjoint;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

DensityMatrix fock(const Grid& g, int m) { return density_from_pure(fock_state(g, m)); }

JointDistribution route_a(const DensityMatrix& rho, const DetectorPairState& det) {
  return joint_probability_from_characteristic(joint_characteristic(quasi_characteristic(rho), det));
}

JointDistribution route_b(const DensityMatrix& rho, const DetectorPairState& det) {
  return joint_probability(wigner_transform(rho), det);
}

// 1: every matrix scenario, three routes pairwise
Outcome route_equivalence() {
  const fs::path root = fs::temp_directory_path() / "wigjoint_acceptance";
  int runs = 0;
  double worst = 0.0;
  std::string culprit;
  for (const auto& e : fs::directory_iterator(WIGJOINT_SCENARIO_DIR)) {
    const ScenarioConfig c = load_scenario(e.path().string());
    if (!c.wants("oracle") || !c.wants("joint") || c.grid.n() != 32 ||
        c.ordering != Ordering::Simultaneous)
      continue;
    const ScenarioResult r = run_scenario(c, (root / c.id).string());
    ++runs;
    for (const auto& row : r.residuals)
      if (row.route == "characteristic_product_vs_wigner_convolution" || row.route.rfind("oracle_vs_", 0) == 0)
        if (row.residual > worst) worst = row.residual, culprit = c.id + " " + row.route;
  }
  return {runs == 24 && worst <= 1e-6, fmt("%d scenarios, worst %.2e (%s)", runs, worst, culprit.c_str())};
}

// 2: random valid triples, including negative-Wigner systems. At n=32 the
// truncated Z_S leaves lattice ripples near -1e-8 in the product route.
Outcome positivity() {
  const Grid g = symmetric_grid(64);
  std::mt19937_64 rng(20261014);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto span = [&](double a, double b) { return a + (b - a) * u(rng); };
  auto system = [&](int kind) {
    switch (kind) {
      case 0: return fock(g, static_cast<int>(rng() % 4));
      case 1: return density_from_pure(cat_state(g, span(0.5, 1.5)));
      case 2: return density_from_pure(coherent_state(g, span(-1, 1), span(-1, 1), span(0.75, 1.4)));
      default:
        const double w = span(0.2, 0.8);
        return mix({{w, fock(g, 1 + static_cast<int>(rng() % 2))}, {1 - w, density_from_pure(cat_state(g, span(0.5, 1.2)))}});
    }
  };
  auto pointer = [&] { return GaussianState::squeezed_detector(span(0.3, 3.0), span(-0.5, 0.5), span(-0.5, 0.5)); };
  double lo = std::numeric_limits<double>::infinity();
  int done = 0;
  for (int t = 0; t < 100; ++t) {
    try {
      const DensityMatrix rho = system(t % 4);
      const auto det = DetectorPairState::product(pointer(), pointer());
      const double a = route_a(rho, det).min(), b = route_b(rho, det).min();
      lo = std::min({lo, a, b});
      ++done;
    } catch (const ValidationError& e) {
      std::printf("  triple %d rejected: %s\n", t, e.what());
    }
  }
  return {done == 100 && lo >= -1e-9, fmt("%d triples, min Pi %.2e", done, lo)};
}

// 3: uncertainty product over Gaussian product detectors
Outcome arthurs_kelly() {
  const auto r = arthurs_kelly_scan(GaussianState::vacuum(), 0.05, 5.0);
  const bool ok = r.min_scanned >= 1.0 - 1e-9 && std::abs(r.min_product - 1.0) <= 1e-6 &&
                  std::abs(r.s_q - 0.5) <= 1e-2 && std::abs(r.s_k - 0.5) <= 1e-2;
  return {ok, fmt("min %.9f at s=(%.4f, %.4f), scanned min %.9f", r.min_product, r.s_q, r.s_k, r.min_scanned)};
}

// 4: symmetric s=1/2 pointers give the Husimi function of Fock 1
Outcome husimi() {
  const Grid g = symmetric_grid(32);
  const auto pi = route_b(fock(g, 1), DetectorPairState::squeezed(0.5));
  double err = 0.0;
  for (std::size_t ik = 0; ik < g.n(); ++ik)
    for (std::size_t iq = 0; iq < g.n(); ++iq) {
      const double r2 = g.position(iq) * g.position(iq) + g.momentum(ik) * g.momentum(ik);
      err = std::max(err, std::abs(pi(ik, iq) - r2 / 2 * std::exp(-r2 / 2) / (2 * std::numbers::pi)));
    }
  const double origin = pi(g.n() / 2, g.n() / 2);
  return {err <= 1e-6 && std::abs(origin) <= 1e-6, fmt("max err %.2e, Pi(0,0) %.2e", err, origin)};
}

// 5: detector cumulants do not depend on the system, and vanish above order 2
Outcome cumulant_additivity() {
  const Grid g = symmetric_grid(32);
  const std::vector<DensityMatrix> systems{fock(g, 0), fock(g, 1), density_from_pure(coherent_state(g, 0.8, -0.4, 1.3)),
                                           density_from_pure(cat_state(g, 1.0))};
  const std::vector<DetectorPairState> dets{
      DetectorPairState::squeezed(0.8),
      DetectorPairState::product(GaussianState::squeezed_detector(1.0, 0.5, -0.5), GaussianState::vacuum())};
  double spread = 0.0, higher = 0.0;
  int checked = 0;
  for (const auto& det : dets) {
    std::vector<CumulantTable> t;
    for (const auto& rho : systems) t.push_back(cumulants(joint_characteristic(quasi_characteristic(rho), det), 4));
    for (const auto& [key, e0] : t[0].entries) {
      if (std::isnan(e0.total)) continue;
      for (const auto& ti : t) {
        const auto& e = ti.at(key.first, key.second);
        if (std::isnan(e.total)) continue;
        ++checked;
        spread = std::max(spread, std::abs((e.total - e.system) - (e0.total - e0.system)));
        if (key.first + key.second >= 3) higher = std::max(higher, std::abs(e.total - e.system));
      }
    }
  }
  return {checked > 0 && spread <= 1e-6 && higher <= 1e-6,
          fmt("%d entries, spread %.2e, orders>=3 detector part %.2e", checked, spread, higher)};
}

// 6: closed-form outcome moments against the distributions
Outcome moment_identities() {
  const Grid g = symmetric_grid(64);
  JointGaussian jg;
  jg.covariance = Eigen::Matrix4d::Identity();
  jg.covariance(0, 3) = jg.covariance(3, 0) = -0.125;
  const std::vector<DetectorPairState> dets{DetectorPairState::vacuum(), DetectorPairState::joint(jg),
                                            DetectorPairState::product(GaussianState::squeezed_detector(0.7, 0.3, -0.2),
                                                                       GaussianState::squeezed_detector(1.4))};
  double err = 0.0;
  for (const auto& det : dets)
    for (const auto& rho : {fock(g, 0), fock(g, 1), density_from_pure(coherent_state(g, 0.8, -0.4, 1.3))}) {
      const OutcomeMoments ref = outcome_moments(rho.moments(), det);
      for (const auto& pi : {route_a(rho, det), route_b(rho, det)}) {
        const OutcomeMoments m = pi.moments();
        err = std::max({err, (m.mean - ref.mean).cwiseAbs().maxCoeff(),
                        (m.covariance - ref.covariance).cwiseAbs().maxCoeff()});
      }
    }
  return {err <= 1e-7, fmt("max moment err %.2e (n=64, correlated pointers included)", err)};
}

// 7: orderings differ, first-measured marginals do not
Outcome sequential() {
  const Grid g = symmetric_grid(32);
  const auto rho = density_from_pure(cat_state(g, 1.0));
  const auto zs = quasi_characteristic(rho);
  const auto det = DetectorPairState::vacuum();
  const auto lt = sequential_characteristic(zs, det, Ordering::KFirst);
  const auto gt = sequential_characteristic(zs, det, Ordering::QFirst);
  const double diff = max_abs_diff(lt.values(), gt.values());
  const auto sk = single_measurement(rho, det.mode(Axis::K), Axis::K);
  const auto sq = single_measurement(rho, det.mode(Axis::Q), Axis::Q);
  const auto mk = marginal_from_characteristic(lt, Axis::K);
  const auto mq = marginal_from_characteristic(gt, Axis::Q);
  double marg = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i)
    marg = std::max({marg, std::abs(mk.values[i] - sk.values[i]), std::abs(mq.values[i] - sq.values[i])});
  return {diff > 1e-3 && marg <= 1e-8, fmt("|Z_k-first - Z_q-first| %.3e, marginal err %.2e", diff, marg)};
}

// 8: conditional state
Outcome conditional() {
  const Grid g = symmetric_grid(32);
  const auto vac = DetectorPairState::vacuum();
  const auto c1 = conditional_wigner(wigner_transform(fock(g, 1)), vac, 0.3, 0.2);
  const auto c0 = conditional_wigner(wigner_transform(fock(g, 0)), vac, 0.3, 0.2);
  const auto r = gaussianity_diagnostic(c1);
  const double shape = std::max({std::abs(r.excess_kurtosis_q), std::abs(r.excess_kurtosis_k), r.negativity});
  const double vs_vac = max_abs_diff(c1.wigner.values(), c0.wigner.values());
  double post = 0.0;
  for (const auto& rho : {fock(g, 0), fock(g, 1)}) post = std::max(post, posterior_consistency(rho, vac).residual);

  const auto rho = fock(g, 1);
  const auto det = DetectorPairState::product(GaussianState::squeezed_detector(0.7, 0.2, 0.1),
                                              GaussianState::squeezed_detector(1.0, -0.1, 0.0));
  const auto ref = wigner_transform(reduced_conditional_state(apply_interaction(compose(rho, det)), {17, 17, 14, 14}));
  const double oracle = max_abs_diff(
      conditional_wigner(wigner_transform(rho), det, g.position(17), g.momentum(14)).wigner.values(), ref.values());

  // cell refinement needs the linear regime: n=64 and wide readout noise
  const Grid h = symmetric_grid(64);
  const auto rh = fock(h, 1);
  const auto dh = DetectorPairState::squeezed(4.0);
  const std::size_t iq = 33, ik = 31;
  const auto point = conditional_wigner(wigner_transform(rh), dh, h.position(iq), h.momentum(ik));
  const auto after = apply_interaction(compose(rh, dh));
  std::vector<double> err;
  for (std::size_t m : {2u, 3u}) {
    const auto cell = wigner_transform(reduced_conditional_state(after, {iq, iq + m - 1, ik, ik + m - 1}));
    err.push_back(max_abs_diff(cell.values(), point.wigner.values()));
  }
  const double order = std::log(err[1] / err[0]) / std::log(2.0);

  const bool ok = shape > 1e-3 && vs_vac > 1e-3 && post < 1e-7 && oracle <= 1e-6 && std::abs(order - 1.0) <= 0.15;
  return {ok, fmt("non-Gaussianity %.3f, vs vacuum prior %.3f, posterior %.2e, oracle %.2e, cell order %.2f", shape,
                  vs_vac, post, oracle, order)};
}

// 9: classical trajectories with positive inputs
Outcome monte_carlo() {
  const Grid g = symmetric_grid(32);
  double frac = 0.0, z = 0.0;
  const std::vector<std::pair<GaussianState, DetectorPairState>> cases{
      {GaussianState::squeezed(0.4, -0.2, 1.5), DetectorPairState::vacuum()},
      {GaussianState::squeezed(-0.3, 0.5, 0.8), DetectorPairState::product(GaussianState::squeezed_detector(0.7, 0.2, 0.1),
                                                                           GaussianState::squeezed_detector(1.3))}};
  for (const auto& [sys, det] : cases) {
    const auto mc = classical_monte_carlo(sys, det, g, 1000000, 2024);
    const auto p = cell_probabilities(joint_characteristic(quasi_characteristic(gaussian_density(g, sys)), det));
    const BandCheck b = multinomial_bands(mc, p);
    frac = std::max(frac, b.fraction_outside_3sigma);
    z = std::max(z, b.max_abs_z);
  }
  return {frac <= 0.01 && z <= 5.0, fmt("10^6 samples, fraction beyond 3 sigma %.4f, max |z| %.2f", frac, z)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"route equivalence", route_equivalence}, {"positivity", positivity},
      {"uncertainty bound", arthurs_kelly},     {"husimi", husimi},
      {"cumulant additivity", cumulant_additivity}, {"moment identities", moment_identities},
      {"sequential orderings", sequential},     {"conditional state", conditional},
      {"classical correspondence", monte_carlo}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
