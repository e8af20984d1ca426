#pragma once

#include <functional>
#include <map>
#include <string>

#include "cbounds_cli/config.hpp"
#include "cbounds_cli/results.hpp"

namespace cbounds::cli {

struct ExperimentDef {
  std::string name;
  std::string title;
  /// Default tolerances; a config may override values but not add names.
  std::map<std::string, double> tolerances;
  /// Throws ConfigInvalid for a malformed model block.
  std::function<void(const ExperimentConfig&)> validate;
  std::function<void(const ExperimentConfig&, ResultSet&)> run;
};

/// Throws ConfigInvalid naming `subcommand` for unknown names.
const ExperimentDef& experiment(const std::string& name);

ExperimentDef finite_experiment();
ExperimentDef ou_experiment();
ExperimentDef rw_experiment();
ExperimentDef sep_experiment();
ExperimentDef ips_experiment();
ExperimentDef report_experiment();

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

struct RunOutcome {
  int exit_code = kExitPass;
  ResultSet results;
  std::string summary;
  double wall_seconds = 0.0;
};

/// Runs the experiment and writes results.csv, run.meta and summary.txt into
/// config.out_dir. The report subcommand writes nothing.
RunOutcome run_experiment(const ExperimentConfig& config);

inline constexpr const char* kArtifactVersion = "coupling-bounds 0.3.0";

}  // namespace cbounds::cli
