#include "cbounds_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cbounds/errors.hpp"
#include "cbounds_cli/experiments.hpp"

namespace cbounds::cli {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigInvalid, path + ": " + what);
}

json tolerance_block(const std::string& subcommand) {
  json out = json::object();
  for (const auto& [name, value] : experiment(subcommand).tolerances) out[name] = value;
  return out;
}

json model_defaults(const std::string& subcommand) {
  if (subcommand == "finite") {
    return {
        {"generator", {{-1.0, 1.0}, {2.0, -2.0}}},
        {"observable", {1.0, -1.0}},
        {"horizon", 2.0},
        {"lambdas", {0.1, 0.5, 1.0}},
        {"mu", {{"dirac", 0}}},
        {"nu", "stationary"},
        {"metric", "discrete"},
        {"alpha", 2.0},
        {"times", {0.1, 0.5, 1.0, 2.0, 5.0}},
        {"lp_orders", {2.0, 4.0}},
        {"lp_times", {0.5, 2.0}},
        {"deviations", {0.5, 1.0, 2.0}},
    };
  }
  if (subcommand == "ou") {
    return {
        {"c", {0.5, 1.0, 2.0}},
        {"lambdas", {0.1, 0.5, 1.0}},
        {"horizons", {1.0, 10.0}},
        {"pathwise", {{"c", 1.0}, {"dt", 0.01}, {"horizon", 5.0}, {"x0", -1.0}, {"y0", 2.0}, {"replicas", 1000}}},
        {"mc", {{"c", 1.0}, {"horizon", 1.0}, {"dt", 0.001}}},
    };
  }
  if (subcommand == "rw") {
    return {
        {"d", 1},
        {"horizon", 10000.0},
        {"fit_times", {100.0, 177.8279410038923, 316.22776601683796, 562.341325190349, 1000.0, 1778.2794100389228,
                       3162.2776601683795, 5623.413251903491, 10000.0}},
        {"l2_dimensions", {1, 2, 3}},
        {"l2_horizons", {1.0, 10.0, 100.0}},
        {"alpha_range", {10.0, 10000.0}},
    };
  }
  if (subcommand == "sep") {
    return {
        {"variance", {{"d", 1}, {"L", 2048}, {"T", {16.0, 32.0, 64.0, 128.0, 256.0}}}},
        {"coupled",
         {{"L", 2048}, {"probe_times", {1.0, 4.0, 16.0, 64.0}}, {"max_offset", 32}, {"replicas", 20000}}},
        {"logmgf",
         {{"lambda", 0.05}, {"L", 2048}, {"T", {16.0, 32.0, 64.0, 128.0, 256.0}}, {"stride", 8}, {"replicas", 300}}},
        {"variance_d3", {{"L", 80}, {"T", {32.0, 40.0, 48.0, 56.0, 64.0}}, {"stride", 4}, {"replicas", 40}}},
        {"variance_d2", {{"L", 160}, {"T", {16.0, 32.0, 64.0, 128.0, 256.0}}, {"stride", 4}, {"replicas", 40}}},
    };
  }
  if (subcommand == "ips") {
    return {
        {"d", 5},
        {"triple_norm_f", 1.0},
        {"horizon", 10.0},
        {"series", {{"g", {0.1, 0.5, 1.0}}, {"horizon", 3.0}}},
        {"spin_flip", {{"epsilon", 1.0}, {"M", 0.5}}},
    };
  }
  if (subcommand == "report") return {{"inputs", json::array()}};
  invalid("subcommand", "unknown subcommand '" + subcommand + "'");
}

std::size_t default_replicas(const std::string& subcommand) {
  if (subcommand == "finite") return 20000;
  if (subcommand == "ou") return 100000;
  if (subcommand == "rw") return 10000;
  if (subcommand == "sep") return 2000;
  return 1;
}

}  // namespace

double ExperimentConfig::tol(const std::string& name) const {
  const auto it = tolerances.find(name);
  require(it != tolerances.end(), ErrorCode::InvalidArgument, "no tolerance named " + name);
  return it->second;
}

json default_config(const std::string& subcommand) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    invalid("subcommand", "unknown subcommand '" + subcommand + "'");
  json out{
      {"subcommand", subcommand},
      {"seed", 20240611},
      {"replicas", default_replicas(subcommand)},
      {"out_dir", "out/" + subcommand},
      {"check", true},
      {"long", false},
      {"model", model_defaults(subcommand)},
  };
  if (subcommand != "report") out["tolerances"] = tolerance_block(subcommand);
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("config", "cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    invalid("config", path.string() + ": " + e.what());
  }
}

ExperimentConfig make_config(const json& doc, const Overrides& overrides) {
  if (!doc.is_object()) invalid("<root>", "configuration must be a JSON object");
  static const std::vector<std::string> known{"subcommand", "seed", "replicas", "out_dir", "check",
                                              "long", "tolerances", "model"};
  for (const auto& [k, v] : doc.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) invalid(k, "unknown field");

  std::string sub;
  if (doc.contains("subcommand")) {
    if (!doc["subcommand"].is_string()) invalid("subcommand", "must be a string");
    sub = doc["subcommand"].get<std::string>();
  }
  if (overrides.subcommand) {
    if (!sub.empty() && sub != *overrides.subcommand)
      invalid("subcommand", "config is for '" + sub + "' but '" + *overrides.subcommand + "' was requested");
    sub = *overrides.subcommand;
  }
  if (sub.empty()) invalid("subcommand", "missing");

  // Defaults first, then the file, then flags.
  json merged = default_config(sub);
  for (const auto& [k, v] : doc.items()) {
    if (k == "model" || k == "tolerances") {
      if (!v.is_object()) invalid(k, "must be an object");
      for (const auto& [mk, mv] : v.items()) {
        if (!merged[k].contains(mk)) invalid(k + "." + mk, "unknown field");
        merged[k][mk] = mv;
      }
    } else {
      merged[k] = v;
    }
  }
  if (overrides.seed) merged["seed"] = *overrides.seed;
  if (overrides.replicas) merged["replicas"] = *overrides.replicas;
  if (overrides.out_dir) merged["out_dir"] = overrides.out_dir->string();
  if (overrides.check) merged["check"] = *overrides.check;
  if (overrides.long_mode) merged["long"] = *overrides.long_mode;

  ExperimentConfig cfg;
  cfg.subcommand = sub;
  const json& seed = merged["seed"];
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    invalid("seed", "must be a nonnegative 64-bit integer");
  cfg.seed = seed.get<std::uint64_t>();
  const json& replicas = merged["replicas"];
  if (!replicas.is_number_integer() || replicas.get<std::int64_t>() < 1)
    invalid("replicas", "must be an integer >= 1");
  cfg.replicas = replicas.get<std::size_t>();
  if (!merged["out_dir"].is_string() || merged["out_dir"].get<std::string>().empty())
    invalid("out_dir", "must be a non-empty path");
  cfg.out_dir = merged["out_dir"].get<std::string>();
  if (!merged["check"].is_boolean()) invalid("check", "must be a boolean");
  cfg.check = merged["check"].get<bool>();
  if (!merged["long"].is_boolean()) invalid("long", "must be a boolean");
  cfg.long_mode = merged["long"].get<bool>();
  if (merged.contains("tolerances")) {
    for (const auto& [name, v] : merged["tolerances"].items()) {
      if (!v.is_number()) invalid("tolerances." + name, "must be a number");
      const double t = v.get<double>();
      if (!(t > 0.0) || !std::isfinite(t)) invalid("tolerances." + name, "must be positive and finite");
      cfg.tolerances[name] = t;
    }
  }
  cfg.model = merged["model"];
  cfg.echo = merged;
  experiment(sub).validate(cfg);
  return cfg;
}

Fields::Fields(const json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) fail(ErrorCode::ConfigInvalid, path_ + ": must be an object");
}

std::string Fields::path_of(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

void Fields::invalid(const std::string& name, const std::string& what) const {
  fail(ErrorCode::ConfigInvalid, path_of(name) + ": " + what);
}

bool Fields::has(const std::string& name) const { return object_.contains(name); }

const json& Fields::raw(const std::string& name) const {
  if (!object_.contains(name)) invalid(name, "missing");
  return object_.at(name);
}

Fields Fields::child(const std::string& name) const {
  const json& v = raw(name);
  if (!v.is_object()) invalid(name, "must be an object");
  return Fields(v, path_of(name));
}

double Fields::number(const std::string& name) const {
  const json& v = raw(name);
  if (!v.is_number() || !std::isfinite(v.get<double>())) invalid(name, "must be a finite number");
  return v.get<double>();
}

double Fields::number(const std::string& name, double fallback) const { return has(name) ? number(name) : fallback; }

double Fields::positive(const std::string& name) const {
  const double v = number(name);
  if (!(v > 0.0)) invalid(name, "must be positive");
  return v;
}

double Fields::positive(const std::string& name, double fallback) const {
  return has(name) ? positive(name) : fallback;
}

long Fields::integer(const std::string& name, long fallback, long min_value) const {
  if (!has(name)) return fallback;
  const json& v = raw(name);
  if (!v.is_number_integer()) invalid(name, "must be an integer");
  const long out = v.get<long>();
  if (out < min_value) invalid(name, "must be >= " + std::to_string(min_value));
  return out;
}

bool Fields::boolean(const std::string& name, bool fallback) const {
  if (!has(name)) return fallback;
  const json& v = raw(name);
  if (!v.is_boolean()) invalid(name, "must be a boolean");
  return v.get<bool>();
}

std::string Fields::string(const std::string& name, const std::string& fallback) const {
  if (!has(name)) return fallback;
  const json& v = raw(name);
  if (!v.is_string()) invalid(name, "must be a string");
  return v.get<std::string>();
}

std::vector<double> Fields::numbers(const std::string& name, std::vector<double> fallback) const {
  if (!has(name)) return fallback;
  const json& v = raw(name);
  if (!v.is_array() || v.empty()) invalid(name, "must be a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
      invalid(name + "[" + std::to_string(i) + "]", "must be a finite number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> Fields::positives(const std::string& name, std::vector<double> fallback) const {
  auto out = numbers(name, std::move(fallback));
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(out[i] > 0.0)) invalid(name + "[" + std::to_string(i) + "]", "must be positive");
  return out;
}

std::vector<long> Fields::integers(const std::string& name, std::vector<long> fallback) const {
  if (!has(name)) return fallback;
  const json& v = raw(name);
  if (!v.is_array() || v.empty()) invalid(name, "must be a non-empty array of integers");
  std::vector<long> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) invalid(name + "[" + std::to_string(i) + "]", "must be an integer");
    out.push_back(v[i].get<long>());
  }
  return out;
}

Matrix Fields::matrix(const std::string& name) const {
  const json& v = raw(name);
  if (!v.is_array() || v.empty()) invalid(name, "must be a non-empty square array of arrays");
  const auto n = static_cast<Eigen::Index>(v.size());
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    const std::string rp = name + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) invalid(rp, "must have " + std::to_string(n) + " entries");
    for (Eigen::Index j = 0; j < n; ++j) {
      const json& e = row[static_cast<std::size_t>(j)];
      if (!e.is_number() || !std::isfinite(e.get<double>()))
        invalid(rp + "[" + std::to_string(j) + "]", "must be a finite number");
      out(i, j) = e.get<double>();
    }
  }
  return out;
}

}  // namespace cbounds::cli
