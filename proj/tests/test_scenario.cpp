#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wigjoint/error.hpp"
#include "wigjoint/scenario.hpp"

using namespace wigjoint;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wigjoint_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kVacuum = R"({
  "id": "vac",
  "grid": {"n": 32},
  "system": {"kind": "vacuum"},
  "detector": {"kind": "vacuum"},
  "pipelines": ["joint", "oracle", "cumulants"]
})";

std::string with(const std::string& key, const std::string& value) {
  nlohmann::json j = nlohmann::json::parse(kVacuum);
  j[key] = nlohmann::json::parse(value);
  return j.dump(2);
}

std::string with(std::initializer_list<std::pair<std::string, std::string>> kv) {
  nlohmann::json j = nlohmann::json::parse(kVacuum);
  for (const auto& [k, v] : kv) j[k] = nlohmann::json::parse(v);
  return j.dump(2);
}

int cli(const std::string& args) {
  const int rc = std::system((std::string(WIGJOINT_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST(Scenario, parses_defaults) {
  const ScenarioConfig c = parse_scenario(kVacuum);
  EXPECT_EQ(c.id, "vac");
  EXPECT_EQ(c.grid.n(), 32u);
  EXPECT_TRUE(c.wants("oracle"));
  EXPECT_FALSE(c.wants("monte_carlo"));
  EXPECT_EQ(c.tolerances.at("oracle"), 1e-6);
  ASSERT_TRUE(c.system_gaussian.has_value());
}

TEST(Scenario, syntax_error_reports_line) {
  try {
    parse_scenario("{\n  \"id\": \"x\",\n  \"grid\": {\"n\": 32,,}\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Scenario, field_errors_name_the_path) {
  try {
    parse_scenario(with("system", R"({"kind": "fock", "m": -1})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("system.m"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_scenario(with("pipelines", R"(["joint", "tomography"])")), ConfigError);
  EXPECT_THROW(parse_scenario(with("system", R"({"kind": "vacuum", "q0": 1})")), ConfigError);
}

TEST(Scenario, uncertainty_violation_is_rejected) {
  try {
    parse_scenario(with("system", R"({"kind": "gaussian", "mean": [0, 0], "covariance": [[0.1, 0], [0, 1]]})"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("uncertainty"), std::string::npos) << e.what();
  }
}

TEST(Scenario, tolerances_only_tighten) {
  const auto c = parse_scenario(with({{"pipelines", R"(["joint"])"}, {"tolerances", R"({"oracle": 1e-7})"}}));
  EXPECT_EQ(c.tolerances.at("oracle"), 1e-7);
  EXPECT_THROW(parse_scenario(with({{"pipelines", R"(["joint"])"}, {"tolerances", R"({"oracle": 1e-5})"}})), ConfigError);
  EXPECT_THROW(parse_scenario(with({{"pipelines", R"(["joint"])"}, {"tolerances", R"({"speed": 1})"}})), ConfigError);
}

TEST(Scenario, vacuum_run_passes_and_is_deterministic) {
  const ScenarioConfig c = parse_scenario(with("pipelines", R"(["joint", "oracle", "monte_carlo"])"));
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const ScenarioResult ra = run_scenario(c, a.string());
  run_scenario(c, b.string());
  EXPECT_EQ(ra.status, ExitStatus::Pass);
  for (const auto& r : ra.residuals)
    if (r.route.rfind("oracle", 0) == 0) EXPECT_LT(r.residual, 1e-6) << r.route;
  for (const char* f : {"joint_oracle.bin", "joint_characteristic_product.bin", "monte_carlo_counts.bin",
                        "joint_wigner_convolution.csv", "system_wigner.bin"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_EQ(slurp(a / "status.txt").substr(0, 11), "status=pass");
}

TEST(Scenario, tolerance_failure_and_incomplete_runs) {
  // a 1e-300 oracle tolerance cannot hold
  const auto strict = parse_scenario(with({{"pipelines", R"(["joint", "oracle"])"}, {"tolerances", R"({"oracle": 1e-300})"}}));
  EXPECT_EQ(run_scenario(strict, scratch("strict").string()).status, ExitStatus::ToleranceFailure);
  // the classical sampler rejects a negative Wigner function
  ScenarioConfig mc = parse_scenario(with("system", R"({"kind": "fock", "m": 1})"));
  mc.pipelines = {"monte_carlo"};
  const fs::path d = scratch("neg");
  EXPECT_EQ(run_scenario(mc, d.string()).status, ExitStatus::ConfigurationError);
  EXPECT_EQ(slurp(d / "status.txt").substr(0, 17), "status=incomplete");
}

TEST(Scenario, compare_runs) {
  const fs::path a = scratch("cmp_a"), b = scratch("cmp_b");
  run_scenario(parse_scenario(kVacuum), a.string());
  const std::string self = compare_runs({a.string(), a.string()});
  std::istringstream is(self);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 4), "key,");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0") << line;
  }
  EXPECT_GT(rows, 5);

  run_scenario(parse_scenario(with("pipelines", R"(["joint"])")), b.string());
  EXPECT_THROW(compare_runs({a.string(), b.string()}), ConfigError);
  EXPECT_THROW(compare_runs({a.string()}), ConfigError);
}

TEST(Scenario, sequential_orderings_differ_in_compare) {
  const fs::path k = scratch("kfirst"), q = scratch("qfirst");
  auto ck = parse_scenario(with("system", R"({"kind": "cat", "q0": 1.0})"));
  ck.pipelines = {"joint", "oracle"};
  ScenarioConfig cq = ck;
  ck.ordering = Ordering::KFirst;
  cq.ordering = Ordering::QFirst;
  EXPECT_EQ(run_scenario(ck, k.string()).status, ExitStatus::Pass);
  EXPECT_EQ(run_scenario(cq, q.string()).status, ExitStatus::Pass);
  const std::string table = compare_runs({k.string(), q.string()});
  const auto pos = table.find("array:joint_characteristic_product.bin");
  ASSERT_NE(pos, std::string::npos);
  const std::string row = table.substr(pos, table.find('\n', pos) - pos);
  EXPECT_GT(std::stod(row.substr(row.rfind(',') + 1)), 1e-3) << row;
}

TEST(Scenario, resolution_reduces_cat_residual) {
  auto c32 = parse_scenario(with("system", R"({"kind": "cat", "q0": 1.5})"));
  c32.pipelines = {"joint", "oracle"};
  auto c64 = parse_scenario(with({{"grid", R"({"n": 64})"}, {"system", R"({"kind": "cat", "q0": 1.5})"}}));
  c64.pipelines = c32.pipelines;
  const fs::path a = scratch("res32"), b = scratch("res64");
  run_scenario(c32, a.string());
  run_scenario(c64, b.string());
  const std::string table = compare_runs({a.string(), b.string()});
  const auto pos = table.find("residual:characteristic_product_vs_wigner_convolution");
  ASSERT_NE(pos, std::string::npos);
  std::stringstream row(table.substr(pos, table.find('\n', pos) - pos));
  std::string key, r32, r64;
  std::getline(row, key, ',');
  std::getline(row, r32, ',');
  std::getline(row, r64, ',');
  EXPECT_LT(std::stod(r64), std::stod(r32));
}

TEST(Scenario, list_and_cli_exit_codes) {
  const auto lines = list_scenarios(WIGJOINT_SCENARIO_DIR);
  EXPECT_GE(lines.size(), 24u);
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "good.json") << kVacuum;
  std::ofstream(dir / "bad.json") << with("system", R"({"kind": "gaussian", "mean": [0, 0], "covariance": [[0.1, 0], [0, 1]]})");
  std::ofstream(dir / "strict.json") << with({{"pipelines", R"(["joint", "oracle"])"}, {"tolerances", R"({"oracle": 1e-300})"}});
  EXPECT_EQ(cli("run " + (dir / "good.json").string() + " --out " + (dir / "out_good").string()), 0);
  EXPECT_EQ(cli("run " + (dir / "strict.json").string() + " --out " + (dir / "out_strict").string()), 1);
  EXPECT_EQ(cli("run " + (dir / "bad.json").string() + " --out " + (dir / "out_bad").string()), 2);
  EXPECT_EQ(cli("run " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("list-scenarios " + dir.string()), 0);
  EXPECT_EQ(cli("compare " + (dir / "out_good").string() + " " + (dir / "out_good").string() + " --out " +
                (dir / "cmp.csv").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "cmp.csv"));
  // default output root
  const std::string env = "WIGJOINT_OUTPUT_ROOT=" + (dir / "root").string() + " ";
  EXPECT_EQ(std::system((env + WIGJOINT_CLI + " run " + (dir / "good.json").string() + " > /dev/null").c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "root" / "vac" / "status.txt"));
}
