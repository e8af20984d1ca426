#include <iostream>

#include "CLI11.hpp"
#include "cbounds/errors.hpp"
#include "cbounds_cli/config.hpp"
#include "cbounds_cli/experiments.hpp"

using namespace cbounds;
using namespace cbounds::cli;

int main(int argc, char** argv) {
  CLI::App app{"Builds and numerically verifies coupling-based concentration bounds.", "coupling-bounds"};
  std::string sub;
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  std::string out_dir;
  bool check = true;
  bool long_mode = false;
  bool dump = false;

  app.add_option("subcommand", sub, "finite | ou | rw | sep | ips | report")->check(CLI::IsMember(subcommands()));
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* rep_opt = app.add_option("--replicas", replicas, "replica count (overrides the config)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* check_opt = app.add_flag("--check,!--no-check", check, "evaluate checks and set the exit status");
  auto* long_opt = app.add_flag("--long", long_mode, "enable slow opt-in experiments");
  app.add_flag("--dump-config", dump, "print the effective configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    json doc = config_path.empty() ? json::object() : read_json_file(config_path);
    Overrides ov;
    if (!sub.empty()) ov.subcommand = sub;
    if (seed_opt->count() > 0) ov.seed = seed;
    if (rep_opt->count() > 0) ov.replicas = replicas;
    if (out_opt->count() > 0) ov.out_dir = out_dir;
    if (check_opt->count() > 0) ov.check = check;
    if (long_opt->count() > 0) ov.long_mode = long_mode;
    if (!ov.subcommand && !doc.contains("subcommand"))
      throw Error(ErrorCode::ConfigInvalid, "subcommand: give it on the command line or in the config");
    const ExperimentConfig cfg = make_config(doc, ov);
    if (dump) {
      std::cout << cfg.echo.dump(2) << '\n';
      return kExitPass;
    }
    const RunOutcome outcome = run_experiment(cfg);
    std::cout << outcome.summary;
    if (cfg.subcommand != "report") std::cout << "artifacts written to " << cfg.out_dir.string() << '\n';
    return outcome.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? kExitConfigError : kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}
