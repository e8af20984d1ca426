#include <chrono>
#include <fstream>

#include "cbounds/errors.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds_cli/experiments.hpp"

namespace cbounds::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::ConfigInvalid, "out_dir: cannot write " + path.string());
  out << content;
  require(static_cast<bool>(out), ErrorCode::ConfigInvalid, "out_dir: failed writing " + path.string());
}

std::vector<std::filesystem::path> report_inputs(const ExperimentConfig& cfg) {
  const Fields m(cfg.model, "model");
  const json& v = m.raw("inputs");
  if (!v.is_array()) m.invalid("inputs", "must be an array of paths");
  std::vector<std::filesystem::path> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) m.invalid("inputs[" + std::to_string(i) + "]", "must be a path");
    out.emplace_back(v[i].get<std::string>());
  }
  if (out.empty()) out.push_back(cfg.out_dir / "results.csv");
  return out;
}

}  // namespace

ExperimentDef report_experiment() {
  ExperimentDef def;
  def.name = "report";
  def.title = "report";
  def.validate = [](const ExperimentConfig& cfg) { (void)report_inputs(cfg); };
  def.run = [](const ExperimentConfig& cfg, ResultSet& out) {
    for (const auto& path : report_inputs(cfg)) {
      const ResultSet table = read_results_csv(path);
      for (const auto& row : table.rows()) out.add(row);
    }
  };
  return def;
}

const ExperimentDef& experiment(const std::string& name) {
  static const std::map<std::string, ExperimentDef> registry = [] {
    std::map<std::string, ExperimentDef> r;
    for (auto def : {finite_experiment(), ou_experiment(), rw_experiment(), sep_experiment(), ips_experiment(),
                     report_experiment()})
      r.emplace(def.name, std::move(def));
    return r;
  }();
  const auto it = registry.find(name);
  if (it == registry.end()) fail(ErrorCode::ConfigInvalid, "subcommand: unknown subcommand '" + name + "'");
  return it->second;
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  const ExperimentDef& def = experiment(config.subcommand);
  RunOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  def.run(config, outcome.results);
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.check) outcome.results.disable_checks();
  outcome.exit_code = outcome.results.all_pass() ? kExitPass : kExitCheckFailed;

  if (config.subcommand == "report") {
    std::string title = "report:";
    for (const auto& p : report_inputs(config)) title += " " + p.string();
    outcome.summary = summary_text(title, outcome.results);
    return outcome;
  }

  outcome.summary = summary_text(def.name + ": " + def.title, outcome.results);
  std::filesystem::create_directories(config.out_dir);
  write_file(config.out_dir / "results.csv", results_csv(outcome.results));
  write_file(config.out_dir / "summary.txt", outcome.summary);
  const json meta{
      {"artifact_version", kArtifactVersion},
      {"config", config.echo},
      {"seed", config.seed},
      {"wall_time_seconds", outcome.wall_seconds},
      {"workers", worker_count()},
      {"rows", outcome.results.rows().size()},
      {"all_checks_passed", outcome.exit_code == kExitPass},
  };
  write_file(config.out_dir / "run.meta", meta.dump(2) + "\n");
  return outcome;
}

}  // namespace cbounds::cli
