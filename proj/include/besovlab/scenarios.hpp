#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "besovlab/drivers.hpp"
#include "besovlab/estimators.hpp"

namespace besovlab {

/// Experiment configuration. Unset fields take the scenario's documented
/// defaults; `params` and `tolerances` hold the scenario-specific knobs
/// (keys listed by scenario_keys).
struct ScenarioConfig {
  std::string name;
  SeedSpec seed{20240917, 0};
  std::optional<std::size_t> n_paths;
  std::optional<double> t;
  std::vector<double> epsilon_sweep;
  std::vector<double> h_sweep;
  std::map<std::string, double> params;
  /// Keyed by check id.
  std::map<std::string, double> tolerances;
  /// Artifacts are written here when non-empty.
  std::string output_dir;
  /// Execution knob only: never changes an emitted number.
  std::size_t workers = 1;
};

/// Parses a flat key=value file body ('#' starts a comment). Recognised keys:
/// name, seed, stream_id, n_paths, t, epsilon_sweep, h_sweep (comma lists,
/// entries like 0.125 or 2^-3), output_dir, workers, tol.<check_id>, and any
/// scenario parameter. Scenario-specific keys are checked by run_scenario.
ScenarioConfig parse_scenario_config(const std::string& text, ScenarioConfig base = {});
ScenarioConfig load_scenario_config(const std::string& path, ScenarioConfig base = {});

enum class Comparison { within, at_most, at_least };
std::string to_string(Comparison c);

struct CheckRecord {
  std::string check_id;
  std::string description;
  std::string anchor;
  double predicted = 0.0;
  double fitted = 0.0;
  std::optional<ScalingFit> fit;
  double tolerance = 0.0;
  Comparison comparison = Comparison::within;
  bool pass = false;
};

struct SweepTable {
  std::string name;
  std::vector<ScalePoint> points;
};

struct ScenarioReport {
  std::string name;
  std::string anchor;
  std::string description;
  std::vector<CheckRecord> checks;
  std::vector<SweepTable> sweeps;
  /// Resolved configuration, every key with its effective value.
  std::vector<std::pair<std::string, std::string>> config_echo;
  /// Seconds. Kept out of the emitted report so artifacts stay byte-stable.
  double wall_time = 0.0;

  bool passed() const;
  const CheckRecord& check(const std::string& id) const;
};

struct ScenarioInfo {
  std::string name;
  std::string anchor;
  std::string description;
};

std::vector<ScenarioInfo> list_scenarios();

struct KeyDoc {
  std::string key;
  std::string default_value;
  std::string doc;
};

/// Every accepted key of a scenario with its default and meaning.
std::vector<KeyDoc> scenario_keys(const std::string& name);

/// Validates the configuration (before any simulation), runs the sweep plan,
/// writes artifacts when output_dir is set and returns the report.
ScenarioReport run_scenario(const ScenarioConfig& config);

enum class ReportFormat { csv, json };

std::string render_report(const ScenarioReport& report, ReportFormat format);
void emit_report(const ScenarioReport& report, ReportFormat format, const std::string& path);

}  // namespace besovlab
