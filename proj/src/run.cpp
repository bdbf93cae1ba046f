#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "wigjoint/error.hpp"
#include "wigjoint/scenario.hpp"

namespace wigjoint {
namespace {

namespace fs = std::filesystem;

class Run {
 public:
  Run(const ScenarioConfig& cfg, fs::path dir) : cfg_(cfg), dir_(std::move(dir)) {}

  // A row with a tolerance key is checked; informational rows pass nullptr.
  void row(const std::string& route, double value, const char* tol_key, double seconds) {
    res_.residuals.push_back({cfg_.id, route, value, seconds});
    if (!tol_key) return;
    const double tol = cfg_.tolerances.at(tol_key);
    if (!(value <= tol)) res_.failures.push_back(route + " = " + format_double(value) + " exceeds " + format_double(tol));
  }
  void warn(std::string w) { res_.warnings.push_back(std::move(w)); }

  void text(const std::string& name, const std::string& body) const {
    std::ofstream os(dir_ / name);
    if (!os) throw IoError("cannot write " + (dir_ / name).string());
    os << body;
  }
  template <class F>
  void csv(const std::string& name, F&& f) const {
    std::ofstream os(dir_ / name);
    if (!os) throw IoError("cannot write " + (dir_ / name).string());
    f(os);
  }
  void binary(const std::string& name, const BinaryArray& a) const { write_binary_file((dir_ / name).string(), a); }
  void distribution(const std::string& stem, const JointDistribution& p) const {
    binary(stem + ".bin", to_binary(p.values()));
    csv(stem + ".csv", [&](std::ostream& os) { write_joint_csv(os, p); });
  }

  ScenarioResult& result() { return res_; }

 private:
  const ScenarioConfig& cfg_;
  fs::path dir_;
  ScenarioResult res_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t nearest(const std::vector<double>& axis, double v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (std::abs(axis[i] - v) < std::abs(axis[best] - v)) best = i;
  return best;
}

double min_value(const JointDistribution& p) { return std::max(0.0, -p.min()); }

void run_pipelines(const ScenarioConfig& cfg, Run& run) {
  using clock = std::chrono::steady_clock;
  const Grid& g = cfg.grid;
  const DensityMatrix& rho = *cfg.system;
  const DetectorPairState& det = cfg.detector;

  auto t0 = clock::now();
  const WignerFunction ws = wigner_transform(rho);
  const QuasiCharacteristic zs = quasi_characteristic(rho);
  run.text("system_summary.txt", state_summary(rho));
  run.binary("system_density.bin", to_binary(rho));
  run.binary("system_wigner.bin", to_binary(ws.values()));
  run.text("system_wigner_axes.txt", axis_sidecar(g, "K", "Q"));
  run.csv("system_wigner.csv", [&](std::ostream& os) { write_wigner_csv(os, ws); });

  const bool simultaneous = cfg.ordering == Ordering::Simultaneous;
  std::optional<JointDistribution> pa, pb;
  const JointCharacteristic z = simultaneous ? joint_characteristic(zs, det)
                                             : sequential_characteristic(zs, det, cfg.ordering);
  if (cfg.wants("joint") || cfg.wants("oracle")) {
    t0 = clock::now();
    pa = joint_probability_from_characteristic(z);
    pa->validate();
    const double ta = seconds_since(t0);
    run.distribution("joint_characteristic_product", *pa);
    run.text("joint_axes.txt", axis_sidecar(g, "I_K", "I_Q"));
    run.row("positivity.characteristic_product", min_value(*pa), "positivity", ta);
    run.row("normalization.characteristic_product", std::abs(pa->integral() - 1.0), "normalization", ta);
    if (simultaneous) {
      t0 = clock::now();
      pb = joint_probability(ws, det);
      pb->validate();
      const double tb = seconds_since(t0);
      run.distribution("joint_wigner_convolution", *pb);
      run.row("positivity.wigner_convolution", min_value(*pb), "positivity", tb);
      run.row("characteristic_product_vs_wigner_convolution", max_abs_diff(pa->values(), pb->values()), "route",
              ta + tb);
    }
  }

  if (cfg.wants("sequential")) {
    if (!det.is_product()) throw ValidationError("sequential pipeline: needs a product detector");
    t0 = clock::now();
    const JointCharacteristic zk = sequential_characteristic(zs, det, Ordering::KFirst);
    const JointCharacteristic zq = sequential_characteristic(zs, det, Ordering::QFirst);
    const JointDistribution pk = joint_probability_from_characteristic(zk);
    const JointDistribution pq = joint_probability_from_characteristic(zq);
    run.distribution("joint_k_first", pk);
    run.distribution("joint_q_first", pq);
    double first = 0.0;
    for (auto [p, axis] : {std::pair{&pk, Axis::K}, std::pair{&pq, Axis::Q}}) {
      const Distribution1D m = p->marginal(axis);
      const Distribution1D s = single_measurement(rho, det.mode(axis), axis);
      for (std::size_t i = 0; i < m.values.size(); ++i) first = std::max(first, std::abs(m.values[i] - s.values[i]));
    }
    const double ts = seconds_since(t0);
    run.row("sequential.first_marginal_vs_single_measurement", first, "single_measurement", ts);
    run.row("sequential.characteristic_k_first_vs_q_first", max_abs_diff(zk.values(), zq.values()), nullptr, ts);
  }

  if (cfg.wants("cumulants")) {
    t0 = clock::now();
    const CumulantTable t = cumulants(z, cfg.cumulant_order);
    double additivity = 0.0, higher = 0.0;
    for (const auto& [ab, e] : t.entries) {
      if (!std::isfinite(e.total)) continue;
      additivity = std::max(additivity, std::abs(e.total - e.system - e.detector));
      if (ab.first + ab.second >= 3) higher = std::max(higher, std::abs(e.detector));
    }
    const double tc = seconds_since(t0);
    run.csv("cumulants.csv", [&](std::ostream& os) { write_cumulant_csv(os, t); });
    run.row("cumulants.additivity", additivity, "cumulant_additivity", tc);
    if (det.is_gaussian()) run.row("cumulants.detector_higher_orders", higher, "cumulant_additivity", tc);
    for (const auto& w : t.warnings) run.warn("cumulants: " + w);
  }

  if (cfg.wants("oracle")) {
    t0 = clock::now();
    const CompositeState cs = compose(rho, det);
    for (const auto& w : cs.warnings) run.warn("oracle: " + w);
    const JointDistribution po = born_joint_distribution(apply_interaction(cs, cfg.ordering));
    po.validate();
    const double to = seconds_since(t0);
    run.distribution("joint_oracle", po);
    run.row("oracle_vs_characteristic_product", max_abs_diff(po.values(), pa->values()), "oracle", to);
    if (pb) run.row("oracle_vs_wigner_convolution", max_abs_diff(po.values(), pb->values()), "oracle", to);
  }

  if (cfg.wants("conditional")) {
    if (!simultaneous) throw ValidationError("conditional pipeline: defined for the simultaneous ordering only");
    t0 = clock::now();
    const CompositeState after = apply_interaction(compose(rho, det));
    double route = 0.0, oracle = 0.0;
    int k = 0;
    for (const OutcomePoint& o : cfg.outcomes) {
      const std::string stem = "conditional_" + std::to_string(k++);
      const std::size_t iq = nearest(g.positions(), o.i_q), ik = nearest(g.momenta(), o.i_k);
      if (std::abs(g.position(iq) - o.i_q) > 1e-9 || std::abs(g.momentum(ik) - o.i_k) > 1e-9)
        run.warn(stem + ": outcome moved to the nearest lattice point (" + format_double(g.position(iq)) + ", " +
                 format_double(g.momentum(ik)) + ")");
      const ConditionalWigner cw = conditional_wigner(ws, det, g.position(iq), g.momentum(ik));
      if (cw.below_floor) {
        run.warn(stem + ": weight " + format_double(cw.weight) + " below the floor, excluded");
        continue;
      }
      const ConditionalCharacteristic cz = conditional_quasi_characteristic(rho, det, cw.outcome_q, cw.outcome_k);
      route = std::max(route, max_abs_diff(to_wigner(cz.normalized()).values(), cw.wigner.values()));
      const WignerFunction ref = wigner_transform(reduced_conditional_state(after, {iq, iq, ik, ik}));
      oracle = std::max(oracle, max_abs_diff(ref.values(), cw.wigner.values()));
      run.binary(stem + ".bin", to_binary(cw.wigner.values()));
      std::ostringstream rep;
      rep << "outcome.I_Q=" << format_double(cw.outcome_q) << "\noutcome.I_K=" << format_double(cw.outcome_k)
          << "\nweight=" << format_double(cw.weight) << "\n"
          << gaussianity_report(gaussianity_diagnostic(cw));
      run.text(stem + "_gaussianity.txt", rep.str());
    }
    const double tc = seconds_since(t0);
    run.row("conditional.wigner_vs_characteristic", route, "conditional_route", tc);
    run.row("conditional.vs_oracle", oracle, "conditional_oracle", tc);
    t0 = clock::now();
    const PosteriorCheck post = posterior_consistency(rho, det);
    run.row("conditional.posterior_consistency", post.residual, "posterior", seconds_since(t0));
  }

  if (cfg.wants("monte_carlo")) {
    t0 = clock::now();
    const MonteCarloResult mc = cfg.system_gaussian
                                    ? classical_monte_carlo(*cfg.system_gaussian, det, g, cfg.samples, cfg.seed)
                                    : classical_monte_carlo(ws, det, cfg.samples, cfg.seed);
    const BandCheck b = multinomial_bands(mc, cell_probabilities(joint_characteristic(zs, det)));
    const double tm = seconds_since(t0);
    run.binary("monte_carlo_counts.bin", to_binary(mc.counts));
    run.row("monte_carlo.fraction_beyond_3sigma", b.fraction_outside_3sigma, "monte_carlo_fraction", tm);
    run.row("monte_carlo.max_abs_z", b.max_abs_z, "monte_carlo_max_z", tm);
  }
}

std::string status_text(const char* status, const ScenarioResult& r, const std::string& error) {
  std::ostringstream os;
  os << "status=" << status << "\n";
  if (!error.empty()) os << "error=" << error << "\n";
  for (const auto& f : r.failures) os << "failure=" << f << "\n";
  for (const auto& w : r.warnings) os << "warning=" << w << "\n";
  return os.str();
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  if (!cfg.system) throw ConfigError("scenario has no system state");
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + out_dir);
  Run run(cfg, dir);
  run.text("status.txt", "status=incomplete\n");
  std::string error;
  ExitStatus failed = ExitStatus::Pass;
  try {
    run_pipelines(cfg, run);
  } catch (const ValidationError& e) {
    error = e.what();
    failed = ExitStatus::ConfigurationError;
  } catch (const std::exception& e) {
    error = e.what();
    failed = ExitStatus::ToleranceFailure;
  }
  ScenarioResult& r = run.result();
  run.csv("residuals.csv", [&](std::ostream& os) { write_residual_csv(os, r.residuals); });
  if (failed != ExitStatus::Pass) {
    r.status = failed;
    r.failures.push_back(error);
    run.text("status.txt", status_text("incomplete", r, error));
  } else {
    r.status = r.failures.empty() ? ExitStatus::Pass : ExitStatus::ToleranceFailure;
    run.text("status.txt", status_text(r.failures.empty() ? "pass" : "fail", r, ""));
  }
  return r;
}

namespace {

std::map<std::string, double> read_keyed_residuals(const fs::path& dir) {
  std::ifstream is(dir / "residuals.csv");
  if (!is) throw ConfigError("compare: " + dir.string() + " has no residuals.csv");
  std::ifstream st(dir / "status.txt");
  std::string line;
  if (!st || !std::getline(st, line) || line == "status=incomplete")
    throw ConfigError("compare: " + dir.string() + " is not a completed run");
  std::map<std::string, double> out;
  try {
    for (const auto& r : read_residual_csv(is)) out["residual:" + r.route] = r.residual;
  } catch (const IoError& e) {
    throw ConfigError("compare: " + dir.string() + ": " + e.what());
  }
  std::ifstream cs(dir / "cumulants.csv");
  if (cs) {
    std::getline(cs, line);
    while (std::getline(cs, line)) {
      std::stringstream ss(line);
      std::string a, b, sys, d, tot;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      std::getline(ss, sys, ',');
      std::getline(ss, d, ',');
      std::getline(ss, tot, ',');
      out["cumulant:" + a + "_" + b + ".total"] = std::stod(tot);
    }
  }
  return out;
}

std::set<std::string> array_names(const fs::path& dir) {
  std::set<std::string> s;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".bin") s.insert(e.path().filename().string());
  return s;
}

}  // namespace

std::string compare_runs(const std::vector<std::string>& run_dirs) {
  if (run_dirs.size() < 2) throw ConfigError("compare: needs at least two run directories");
  std::vector<std::map<std::string, double>> values;
  std::set<std::string> arrays;
  for (std::size_t i = 0; i < run_dirs.size(); ++i) {
    values.push_back(read_keyed_residuals(run_dirs[i]));
    const auto names = array_names(run_dirs[i]);
    if (i == 0) {
      arrays = names;
    } else {
      std::set<std::string> common;
      std::set_intersection(arrays.begin(), arrays.end(), names.begin(), names.end(),
                            std::inserter(common, common.begin()));
      arrays = std::move(common);
    }
  }
  auto keys = [](const std::map<std::string, double>& m, const char* prefix) {
    std::set<std::string> k;
    for (const auto& [key, v] : m)
      if (key.rfind(prefix, 0) == 0) k.insert(key);
    return k;
  };
  for (std::size_t i = 1; i < values.size(); ++i)
    if (keys(values[i], "residual:") != keys(values[0], "residual:"))
      throw ConfigError("compare: schema mismatch, " + run_dirs[i] + " reports different residual rows than " +
                        run_dirs[0]);

  std::ostringstream os;
  os << "key";
  for (const auto& d : run_dirs) os << ',' << d;
  os << ",max_difference\n";
  std::set<std::string> all;
  for (const auto& [k, v] : values[0]) {
    (void)v;
    if (std::all_of(values.begin(), values.end(), [&](const auto& m) { return m.count(k) > 0; })) all.insert(k);
  }
  for (const auto& k : all) {
    os << k;
    double lo = values[0].at(k), hi = lo;
    for (const auto& m : values) {
      const double v = m.at(k);
      os << ',' << format_double(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    os << ',' << format_double(hi - lo) << '\n';
  }
  // arrays: each column is the max-norm difference from the first run
  for (const auto& name : arrays) {
    std::vector<BinaryArray> a;
    for (const auto& d : run_dirs) a.push_back(read_binary_file((fs::path(d) / name).string()));
    os << "array:" << name;
    const bool same_shape =
        std::all_of(a.begin(), a.end(), [&](const BinaryArray& x) { return x.n == a[0].n && x.rank == a[0].rank; });
    if (!same_shape) {
      for (const auto& x : a) os << ",n=" << x.n;
      os << ",\n";
      continue;
    }
    double worst = 0.0;
    for (const auto& x : a) {
      double d = 0.0;
      for (std::size_t i = 0; i < x.data.size(); ++i) d = std::max(d, std::abs(x.data[i] - a[0].data[i]));
      worst = std::max(worst, d);
      os << ',' << format_double(d);
    }
    os << ',' << format_double(worst) << '\n';
  }
  return os.str();
}

}  // namespace wigjoint
