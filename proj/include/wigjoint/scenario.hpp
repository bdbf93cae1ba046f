#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wigjoint/io.hpp"

namespace wigjoint {

/// Bad scenario file: parse error (with line) or invalid field (with path).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExitStatus : int { Pass = 0, ToleranceFailure = 1, ConfigurationError = 2 };

/// Default tolerances; a scenario may only tighten them.
const std::map<std::string, double>& default_tolerances();

struct OutcomePoint {
  double i_q = 0.0;
  double i_k = 0.0;
};

struct ScenarioConfig {
  std::string id;
  std::string description;
  Grid grid = symmetric_grid(32);
  std::optional<DensityMatrix> system;
  std::optional<GaussianState> system_gaussian;  // set for Gaussian system kinds
  std::string system_kind;
  DetectorPairState detector = DetectorPairState::vacuum();
  std::string detector_kind;
  Ordering ordering = Ordering::Simultaneous;
  std::vector<std::string> pipelines;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 1;
  std::uint64_t samples = 1000000;
  int cumulant_order = 4;
  std::vector<OutcomePoint> outcomes;

  bool wants(const std::string& pipeline) const;
};

/// Parses one JSON scenario document. Throws ConfigError for syntax or field
/// problems and passes constructor ValidationErrors through verbatim.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

struct ScenarioResult {
  ExitStatus status = ExitStatus::Pass;
  std::vector<ResidualRow> residuals;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
};

/// Runs every requested pipeline and writes artifacts to out_dir. Any
/// invariant violation stops the run and marks status.txt incomplete.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

/// Default output directory: $WIGJOINT_OUTPUT_ROOT/<id>, else wigjoint-out/<id>.
std::string default_output_dir(const std::string& id);

/// Joins residuals, cumulants and arrays of completed runs into one CSV with
/// a max-difference column. Throws ConfigError on schema mismatch.
std::string compare_runs(const std::vector<std::string>& run_dirs);

/// One line per scenario file in dir: file name, id, system, detector, pipelines.
std::vector<std::string> list_scenarios(const std::string& dir);

}  // namespace wigjoint
