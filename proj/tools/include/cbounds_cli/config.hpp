#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cbounds/types.hpp"

namespace cbounds::cli {

using nlohmann::json;

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"finite", "ou", "rw", "sep", "ips", "report"};
  return names;
}

struct ExperimentConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  std::filesystem::path out_dir;
  bool check = true;
  /// Enables the slow opt-in experiments.
  bool long_mode = false;
  /// Defaults of the subcommand merged with the overrides from the file.
  std::map<std::string, double> tolerances;
  /// Subcommand-specific parameters, validated by the experiment.
  json model;
  /// The effective configuration after flag overrides, echoed into run.meta.
  json echo;

  double tol(const std::string& name) const;
};

struct Overrides {
  std::optional<std::string> subcommand = std::nullopt;
  std::optional<std::uint64_t> seed = std::nullopt;
  std::optional<std::size_t> replicas = std::nullopt;
  std::optional<std::filesystem::path> out_dir = std::nullopt;
  std::optional<bool> check = std::nullopt;
  std::optional<bool> long_mode = std::nullopt;
};

/// Built-in configuration of a subcommand (identical to the files in configs/).
json default_config(const std::string& subcommand);

/// Validates `doc` and applies the flag overrides. Throws ConfigInvalid whose
/// message starts with the offending field path.
ExperimentConfig make_config(const json& doc, const Overrides& overrides);

/// Reads and parses a JSON file; parse errors are reported as ConfigInvalid.
json read_json_file(const std::filesystem::path& path);

/// Typed access to a JSON object that reports failures with the field path.
class Fields {
 public:
  Fields(const json& object, std::string path);

  bool has(const std::string& name) const;
  double number(const std::string& name) const;
  double number(const std::string& name, double fallback) const;
  double positive(const std::string& name) const;
  double positive(const std::string& name, double fallback) const;
  long integer(const std::string& name, long fallback, long min_value) const;
  bool boolean(const std::string& name, bool fallback) const;
  std::string string(const std::string& name, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& name, std::vector<double> fallback) const;
  std::vector<double> positives(const std::string& name, std::vector<double> fallback) const;
  std::vector<long> integers(const std::string& name, std::vector<long> fallback) const;
  Matrix matrix(const std::string& name) const;
  const json& raw(const std::string& name) const;
  Fields child(const std::string& name) const;
  std::string path_of(const std::string& name) const;
  [[noreturn]] void invalid(const std::string& name, const std::string& what) const;

 private:
  const json& object_;
  std::string path_;
};

}  // namespace cbounds::cli
