#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "wigjoint/error.hpp"
#include "wigjoint/scenario.hpp"

using namespace wigjoint;

namespace {

int code(ExitStatus s) { return static_cast<int>(s); }

int do_run(const std::string& config, std::string out, bool verbose) {
  const ScenarioConfig cfg = load_scenario(config);
  if (out.empty()) out = default_output_dir(cfg.id);
  const ScenarioResult r = run_scenario(cfg, out);
  if (verbose) {
    for (const auto& row : r.residuals) std::cout << row.route << " " << format_double(row.residual) << "\n";
    for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
  }
  for (const auto& f : r.failures) std::cerr << cfg.id << ": " << f << "\n";
  std::cout << cfg.id << ": " << (r.status == ExitStatus::Pass ? "pass" : "FAIL") << " (" << out << ")\n";
  return code(r.status);
}

int do_compare(const std::vector<std::string>& dirs, const std::string& out) {
  const std::string table = compare_runs(dirs);
  if (out.empty()) {
    std::cout << table;
    return 0;
  }
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot write " + out);
  os << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint measurement of conjugate observables in phase space"};
  app.require_subcommand(1);

  std::string config, out_dir, out_file, list_dir;
  std::vector<std::string> dirs;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("config", config, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory (default $WIGJOINT_OUTPUT_ROOT/<id>)");
  run->add_flag("--verbose", verbose, "print every residual");

  auto* cmp = app.add_subcommand("compare", "join the reports of completed runs");
  cmp->add_option("dirs", dirs, "run directories")->required()->expected(2, -1);
  cmp->add_option("--out", out_file, "write the CSV here instead of stdout");

  auto* list = app.add_subcommand("list-scenarios", "list scenario files in a directory");
  list->add_option("dir", list_dir, "directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitStatus::ConfigurationError);
  }

  try {
    if (*run) return do_run(config, out_dir, verbose);
    if (*cmp) return do_compare(dirs, out_file);
    for (const auto& line : list_scenarios(list_dir)) std::cout << line << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
  }
  return code(ExitStatus::ConfigurationError);
}
