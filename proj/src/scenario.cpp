#include "wigjoint/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wigjoint/error.hpp"

namespace wigjoint {
namespace {

using json = nlohmann::json;

const std::set<std::string> kPipelines{"joint", "cumulants", "sequential", "conditional", "oracle", "monte_carlo"};

// Field access with the dotted path carried along for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError("field '" + path_ + "': " + what); }

  bool has(const std::string& key) const { return j_.contains(key); }
  Node at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) fail("missing required field '" + key + "'");
    return Node(j_.at(key), child(key));
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  void allow_only(std::initializer_list<const char*> keys) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [k, v] : j_.items()) {
      (void)v;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        Node(v, child(k)).fail("unknown field");
    }
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long>();
  }
  std::string text() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  template <int N>
  Eigen::Matrix<double, N, 1> vector() const {
    if (size() != N) fail("expected " + std::to_string(N) + " entries");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v(i) = at(i).number();
    return v;
  }
  template <int N>
  Eigen::Matrix<double, N, N> matrix() const {
    if (size() != N) fail("expected " + std::to_string(N) + " rows");
    Eigen::Matrix<double, N, N> m;
    for (int i = 0; i < N; ++i) m.row(i) = at(i).vector<N>().transpose();
    return m;
  }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& j_;
  std::string path_;
};

// Constructor errors keep their text; the field path is prefixed.
template <class F>
auto guarded(const Node& n, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError("field '" + n.path() + "': " + e.what());
  }
}

struct SystemSpec {
  DensityMatrix rho;
  std::optional<GaussianState> gaussian;
};

SystemSpec parse_system(const Node& n, const Grid& grid) {
  const std::string kind = n.at("kind").text();
  return guarded(n, [&]() -> SystemSpec {
    if (kind == "vacuum") {
      n.allow_only({"kind"});
      return {density_from_pure(coherent_state(grid, 0, 0, 1)), GaussianState::vacuum()};
    }
    if (kind == "coherent" || kind == "squeezed") {
      n.allow_only({"kind", "q0", "k0", "s"});
      const double q0 = n.number("q0", 0), k0 = n.number("k0", 0);
      const double s = kind == "coherent" ? n.number("s", 1.0) : n.at("s").number();
      return {density_from_pure(coherent_state(grid, q0, k0, s)), GaussianState::squeezed(q0, k0, s)};
    }
    if (kind == "gaussian") {
      n.allow_only({"kind", "mean", "covariance"});
      GaussianState g(n.at("mean").vector<2>(), n.at("covariance").matrix<2>());
      return {gaussian_density(grid, g), g};
    }
    if (kind == "fock") {
      n.allow_only({"kind", "m"});
      const long m = n.at("m").integer();
      if (m < 0) n.at("m").fail("must be nonnegative");
      return {density_from_pure(fock_state(grid, static_cast<int>(m))), std::nullopt};
    }
    if (kind == "cat") {
      n.allow_only({"kind", "q0"});
      return {density_from_pure(cat_state(grid, n.at("q0").number())), std::nullopt};
    }
    if (kind == "mixture") {
      n.allow_only({"kind", "components"});
      const Node c = n.at("components");
      std::vector<std::pair<double, DensityMatrix>> parts;
      for (std::size_t i = 0; i < c.size(); ++i) {
        const Node e = c.at(i);
        e.allow_only({"weight", "state"});
        parts.emplace_back(e.at("weight").number(), parse_system(e.at("state"), grid).rho);
      }
      if (parts.empty()) c.fail("needs at least one component");
      return {mix(parts), std::nullopt};
    }
    n.at("kind").fail("unknown system kind '" + kind + "'");
  });
}

DetectorMode parse_pointer(const Node& n, const Grid& pointer_grid) {
  n.allow_only({"s", "mean_i", "mean_phi", "var_i", "var_phi", "cov_i_phi", "state", "sharp"});
  return guarded(n, [&]() -> DetectorMode {
    if (n.has("state")) return parse_system(n.at("state"), pointer_grid).rho;
    if (n.has("sharp") && n.at("sharp").raw() == true) return GaussianState::sharp_detector();
    const double mi = n.number("mean_i", 0), mp = n.number("mean_phi", 0);
    if (n.has("var_i") || n.has("var_phi"))
      return GaussianState::detector(mi, mp, n.at("var_i").number(), n.at("var_phi").number(),
                                     n.number("cov_i_phi", 0));
    return GaussianState::squeezed_detector(n.number("s", 1.0), mi, mp);
  });
}

DetectorPairState parse_detector(const Node& n, const Grid& grid) {
  const std::string kind = n.at("kind").text();
  return guarded(n, [&]() -> DetectorPairState {
    if (kind == "vacuum") {
      n.allow_only({"kind"});
      return DetectorPairState::vacuum();
    }
    if (kind == "sharp") {
      n.allow_only({"kind"});
      return DetectorPairState::sharp();
    }
    if (kind == "squeezed") {
      n.allow_only({"kind", "s"});
      return DetectorPairState::squeezed(n.at("s").number());
    }
    if (kind == "product") {
      n.allow_only({"kind", "q", "k"});
      return DetectorPairState::product(parse_pointer(n.at("q"), grid.conjugate()), parse_pointer(n.at("k"), grid));
    }
    if (kind == "joint") {
      n.allow_only({"kind", "mean", "covariance"});
      JointGaussian g;
      if (n.has("mean")) g.mean = n.at("mean").vector<4>();
      g.covariance = n.at("covariance").matrix<4>();
      return DetectorPairState::joint(g);
    }
    n.at("kind").fail("unknown detector kind '" + kind + "'");
  });
}

Ordering parse_ordering(const Node& n) {
  const std::string s = n.text();
  if (s == "simultaneous") return Ordering::Simultaneous;
  if (s == "k-first") return Ordering::KFirst;
  if (s == "q-first") return Ordering::QFirst;
  n.fail("expected simultaneous, k-first or q-first");
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<long>(std::min(byte, text.size()));
  return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

}  // namespace

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"route", 1e-8},             // characteristic product vs Wigner convolution
      {"oracle", 1e-6},            // formula vs Born rule
      {"positivity", 1e-9},        // -min Pi
      {"normalization", 1e-8},     // |int Pi - 1|
      {"single_measurement", 1e-8},
      {"posterior", 1e-7},
      {"conditional_route", 1e-7},
      {"conditional_oracle", 1e-6},
      {"cumulant_additivity", 1e-6},
      {"monte_carlo_fraction", 0.01},
      {"monte_carlo_max_z", 5.0},
  };
  return t;
}

bool ScenarioConfig::wants(const std::string& p) const {
  return std::find(pipelines.begin(), pipelines.end(), p) != pipelines.end();
}

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  const Node root(doc, "");
  root.allow_only({"id", "description", "grid", "system", "detector", "ordering", "pipelines", "tolerances", "seed",
                   "samples", "cumulant_order", "outcomes"});
  ScenarioConfig c;
  c.id = root.at("id").text();
  if (c.id.empty() || c.id.find_first_of("/\\,") != std::string::npos)
    root.at("id").fail("must be nonempty without '/', '\\' or ','");
  if (root.has("description")) c.description = root.at("description").text();

  const Node g = root.at("grid");
  g.allow_only({"n", "length"});
  const long n = g.at("n").integer();
  if (n <= 0) g.at("n").fail("must be positive");
  c.grid = guarded(g, [&] {
    return g.has("length") ? Grid(static_cast<std::size_t>(n), g.at("length").number())
                           : symmetric_grid(static_cast<std::size_t>(n));
  });

  const Node sys = root.at("system");
  c.system_kind = sys.at("kind").text();
  SystemSpec s = parse_system(sys, c.grid);
  c.system = std::move(s.rho);
  c.system_gaussian = s.gaussian;

  const Node det = root.at("detector");
  c.detector_kind = det.at("kind").text();
  c.detector = parse_detector(det, c.grid);

  if (root.has("ordering")) c.ordering = parse_ordering(root.at("ordering"));

  const Node p = root.at("pipelines");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string name = p.at(i).text();
    if (!kPipelines.count(name)) p.at(i).fail("unknown pipeline '" + name + "'");
    c.pipelines.push_back(name);
  }

  c.tolerances = default_tolerances();
  if (root.has("tolerances")) {
    const Node t = root.at("tolerances");
    if (!t.raw().is_object()) t.fail("expected an object");
    for (const auto& [key, v] : t.raw().items()) {
      (void)v;
      const Node e = t.at(key);
      const auto it = c.tolerances.find(key);
      if (it == c.tolerances.end()) e.fail("unknown tolerance");
      const double x = e.number();
      if (!(x > 0)) e.fail("must be positive");
      if (x > it->second)
        e.fail("override " + format_double(x) + " would loosen the default " + format_double(it->second));
      it->second = x;
    }
  }
  if (root.has("seed")) {
    const long s = root.at("seed").integer();
    if (s < 0) root.at("seed").fail("must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (root.has("samples")) {
    const long s = root.at("samples").integer();
    if (s <= 0) root.at("samples").fail("must be positive");
    c.samples = static_cast<std::uint64_t>(s);
  }
  if (root.has("cumulant_order")) {
    const long o = root.at("cumulant_order").integer();
    if (o < 1 || o > 6) root.at("cumulant_order").fail("must lie in 1..6");
    c.cumulant_order = static_cast<int>(o);
  }
  if (root.has("outcomes")) {
    const Node o = root.at("outcomes");
    for (std::size_t i = 0; i < o.size(); ++i) {
      const auto v = o.at(i).vector<2>();
      c.outcomes.push_back({v(0), v(1)});
    }
  }
  if (c.wants("conditional") && c.outcomes.empty()) root.fail("the conditional pipeline needs 'outcomes'");
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string default_output_dir(const std::string& id) {
  const char* root = std::getenv("WIGJOINT_OUTPUT_ROOT");
  const std::filesystem::path base = (root && *root) ? root : "wigjoint-out";
  return (base / id).string();
}

std::vector<std::string> list_scenarios(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  for (const auto& f : files) {
    std::ifstream is(f);
    std::stringstream ss;
    ss << is.rdbuf();
    std::string line = f.filename().string();
    try {
      const json j = json::parse(ss.str());
      line += "  id=" + j.value("id", std::string("?"));
      if (j.contains("system")) line += "  system=" + j["system"].value("kind", std::string("?"));
      if (j.contains("detector")) line += "  detector=" + j["detector"].value("kind", std::string("?"));
      if (j.contains("pipelines")) {
        std::string p;
        for (const auto& x : j["pipelines"]) p += (p.empty() ? "" : ",") + x.get<std::string>();
        line += "  pipelines=" + p;
      }
    } catch (const json::exception& e) {
      line += "  (unreadable: " + std::string(e.what()) + ")";
    }
    out.push_back(line);
  }
  return out;
}

}  // namespace wigjoint
