#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cbounds/errors.hpp"
#include "cbounds_cli/config.hpp"
#include "cbounds_cli/experiments.hpp"
#include "doctest.h"

using namespace cbounds;
using namespace cbounds::cli;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("cbounds-cli-" + std::to_string(::getpid()) + "-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const json& doc, const Overrides& ov = {}) {
  try {
    (void)make_config(doc, ov);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    return e.what();
  }
  return "";
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

ExperimentConfig small_rw(const std::filesystem::path& out) {
  json doc = default_config("rw");
  doc["replicas"] = 500;
  doc["out_dir"] = out.string();
  doc["model"]["horizon"] = 1000.0;
  doc["model"]["fit_times"] = {10.0, 31.6, 100.0, 316.0, 1000.0};
  doc["model"]["l2_dimensions"] = {1};
  doc["model"]["l2_horizons"] = {10.0};
  doc["tolerances"]["ks"] = 0.1;
  doc["tolerances"]["tail_slope"] = 0.2;
  return make_config(doc, {});
}

}  // namespace

TEST_CASE("bundled configurations match the built-in defaults") {
  const std::filesystem::path dir = CBOUNDS_CONFIG_DIR;
  const std::vector<std::pair<std::string, std::string>> files{
      {"two_state.json", "finite"}, {"ou.json", "ou"}, {"rw.json", "rw"},
      {"sep.json", "sep"},          {"ips.json", "ips"}, {"report.json", "report"}};
  for (const auto& [file, sub] : files) {
    const ExperimentConfig from_file = make_config(read_json_file(dir / file), {});
    const ExperimentConfig builtin = make_config(json::object(), {.subcommand = sub});
    CHECK(from_file.subcommand == sub);
    CHECK(from_file.echo == builtin.echo);
  }
}

TEST_CASE("configuration errors name the field") {
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"replicas", 0}}), "ConfigInvalid: replicas"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}}, {.replicas = 0}), "ConfigInvalid: replicas"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"replicas", -3}}), "ConfigInvalid: replicas"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"seed", -1}}), "ConfigInvalid: seed"));
  CHECK(starts_with(config_error({{"subcommand", "nope"}}), "ConfigInvalid: subcommand"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"colour", 1}}), "ConfigInvalid: colour"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"tolerances", {{"sandwich", -1.0}}}}),
                    "ConfigInvalid: tolerances.sandwich"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"tolerances", {{"made_up", 1.0}}}}),
                    "ConfigInvalid: tolerances.made_up"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"model", {{"generator", {{-1.0, 2.0}, {1.0, -1.0}}}}}}),
                    "ConfigInvalid: model.generator"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"model", {{"observable", {1.0, 2.0, 3.0}}}}}),
                    "ConfigInvalid: model.observable"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}, {"model", {{"mu", {{"dirac", 7}}}}}}),
                    "ConfigInvalid: model.mu.dirac"));
  CHECK(starts_with(config_error({{"subcommand", "ou"}, {"model", {{"pathwise", {{"c", 1.0}, {"dt", 0.5}, {"horizon", 1.0}, {"x0", 0.0}, {"y0", 1.0}}}}}}),
                    "ConfigInvalid: model.pathwise.dt"));
  CHECK(starts_with(config_error({{"subcommand", "ips"}, {"model", {{"d", 3}}}}), "ConfigInvalid: model.d"));
  CHECK(starts_with(config_error({{"subcommand", "sep"}, {"model", {{"variance", {{"L", 64}, {"T", {16.0, 32.0, 64.0, 128.0, 256.0}}}}}}}),
                    "ConfigInvalid: model.variance.L"));
  CHECK(starts_with(config_error({{"subcommand", "finite"}}, {.subcommand = "ou"}), "ConfigInvalid: subcommand"));
}

TEST_CASE("flags override the file") {
  const json doc{{"subcommand", "finite"}, {"seed", 5}, {"replicas", 10}, {"out_dir", "a"}, {"check", true}};
  const auto cfg = make_config(doc, {.seed = 9, .replicas = 20, .out_dir = "b", .check = false, .long_mode = true});
  CHECK(cfg.seed == 9);
  CHECK(cfg.replicas == 20);
  CHECK(cfg.out_dir == "b");
  CHECK_FALSE(cfg.check);
  CHECK(cfg.long_mode);
  CHECK(cfg.echo["seed"] == 9);
  const auto plain = make_config(doc, {});
  CHECK(plain.seed == 5);
  CHECK(plain.replicas == 10);
  json big = doc;
  big["seed"] = 18446744073709551615ULL;
  CHECK(make_config(big, {}).seed == 18446744073709551615ULL);
}

TEST_CASE("finite two-state example passes and writes all artifacts") {
  const auto dir = scratch("finite");
  const auto cfg = make_config(read_json_file(std::filesystem::path(CBOUNDS_CONFIG_DIR) / "two_state.json"),
                               {.out_dir = dir});
  const RunOutcome r = run_experiment(cfg);
  CHECK(r.exit_code == kExitPass);
  for (const char* f : {"results.csv", "run.meta", "summary.txt"}) CHECK(std::filesystem::exists(dir / f));

  const json meta = json::parse(slurp(dir / "run.meta"));
  CHECK(meta["seed"] == cfg.seed);
  CHECK(meta["config"] == cfg.echo);
  CHECK(meta["artifact_version"] == kArtifactVersion);
  CHECK(meta.contains("wall_time_seconds"));

  const std::string csv = slurp(dir / "results.csv");
  CHECK(starts_with(csv, "check,key,quantity,value,reference,tolerance,provenance,pass\n"));
  const ResultSet back = read_results_csv(dir / "results.csv");
  REQUIRE(back.rows().size() == r.results.rows().size());
  const auto sorted = r.results.sorted();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& a = sorted[i];
    const auto& b = back.rows()[i];
    CHECK(a.check == b.check);
    CHECK(a.key == b.key);
    if (!std::isnan(a.value)) CHECK(a.value == b.value);
    CHECK(a.verdict == b.verdict);
    CHECK((a.provenance == "exact" || a.provenance == "quadrature" || a.provenance == "mc"));
  }
  for (std::size_t i = 1; i < sorted.size(); ++i)
    CHECK(std::tie(sorted[i - 1].check, sorted[i - 1].key, sorted[i - 1].quantity) <=
          std::tie(sorted[i].check, sorted[i].key, sorted[i].quantity));
  const std::string summary = slurp(dir / "summary.txt");
  CHECK(summary.find("PASS  sandwich") != std::string::npos);
  CHECK(summary.find("PASS  two_state") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("same config and seed give identical results.csv") {
  const auto a = scratch("repro-a");
  const auto b = scratch("repro-b");
  for (const std::string sub : {"finite", "ips"}) {
    (void)run_experiment(make_config(json::object(), {.subcommand = sub, .out_dir = a}));
    (void)run_experiment(make_config(json::object(), {.subcommand = sub, .out_dir = b}));
    CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  }
  (void)run_experiment(small_rw(a));
  (void)run_experiment(small_rw(b));
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  auto other = small_rw(b);
  other.seed += 1;
  (void)run_experiment(other);
  CHECK(slurp(a / "results.csv") != slurp(b / "results.csv"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("failing checks set exit status 1 and --no-check disables them") {
  const auto dir = scratch("fail");
  json doc = default_config("finite");
  doc["out_dir"] = dir.string();
  doc["tolerances"]["mc_se"] = 1e-9;
  const RunOutcome r = run_experiment(make_config(doc, {}));
  CHECK(r.exit_code == kExitCheckFailed);
  CHECK(r.summary.find("FAIL  feynman_kac_mc") != std::string::npos);
  CHECK(r.summary.find("failure: feynman_kac_mc") != std::string::npos);

  const RunOutcome off = run_experiment(make_config(doc, {.check = false}));
  CHECK(off.exit_code == kExitPass);
  for (const auto& row : off.results.rows()) CHECK((row.verdict == Verdict::Skip || row.verdict == Verdict::Info));
  std::filesystem::remove_all(dir);
}

TEST_CASE("report is read-only and deterministic") {
  const auto dir = scratch("report");
  (void)run_experiment(make_config(json::object(), {.subcommand = "ips", .out_dir = dir}));
  const auto before = slurp(dir / "results.csv");
  std::size_t files_before = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files_before;

  const auto cfg = make_config({{"subcommand", "report"}}, {.out_dir = dir});
  const RunOutcome r1 = run_experiment(cfg);
  const RunOutcome r2 = run_experiment(cfg);
  CHECK(r1.exit_code == kExitPass);
  CHECK(r1.summary == r2.summary);
  CHECK(results_csv(r1.results) == before);
  CHECK(slurp(dir / "results.csv") == before);
  std::size_t files_after = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files_after;
  CHECK(files_after == files_before);

  // A failing row in an existing table makes the report fail.
  std::string edited = before;
  const auto pos = edited.rfind(",pass\n");
  REQUIRE(pos != std::string::npos);
  edited.replace(pos, 6, ",fail\n");
  std::ofstream(dir / "edited.csv", std::ios::binary) << edited;
  const auto bad = make_config({{"subcommand", "report"}, {"model", {{"inputs", {(dir / "edited.csv").string()}}}}}, {});
  CHECK(run_experiment(bad).exit_code == kExitCheckFailed);

  std::ofstream(dir / "garbage.csv") << "not,a,results,file\n";
  const auto garbage =
      make_config({{"subcommand", "report"}, {"model", {{"inputs", {(dir / "garbage.csv").string()}}}}}, {});
  CHECK_THROWS_AS(run_experiment(garbage), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("executable exit codes") {
  const auto dir = scratch("exe");
  const std::string exe = CBOUNDS_CLI_PATH;
  auto run = [](const std::string& cmd) {
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(run(exe + " ips --out " + (dir / "ips").string()) == 0);
  CHECK(run(exe + " finite --replicas 0 --out " + (dir / "x").string()) == 2);
  CHECK(run(exe + " bogus") == 2);
  CHECK(run(exe + " --config " + (dir / "missing.json").string()) == 2);
  CHECK(run(exe + " report --out " + (dir / "ips").string()) == 0);
  std::ofstream(dir / "bad.json") << R"({"subcommand": "finite", "tolerances": {"mc_se": 1e-9}})";
  CHECK(run(exe + " --config " + (dir / "bad.json").string() + " --out " + (dir / "bad").string()) == 1);
  CHECK(run(exe + " --config " + (dir / "bad.json").string() + " --no-check --out " + (dir / "bad").string()) == 0);
  std::filesystem::remove_all(dir);
}
