#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cbounds::cli {

enum class Verdict { Pass, Fail, Info, Skip };

std::string_view to_string(Verdict v) noexcept;

/// One line of results.csv. `provenance` is exact, quadrature or mc; for mc rows the
/// tolerance column holds the standard-error allowance.
struct ResultRow {
  std::string check;
  std::string key;
  std::string quantity;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  std::string provenance;
  Verdict verdict = Verdict::Info;
};

class ResultSet {
 public:
  /// value <= reference + tolerance.
  void at_most(std::string check, std::string key, std::string quantity, double value, double reference,
               double tolerance, std::string provenance);
  /// |value - reference| <= tolerance.
  void near(std::string check, std::string key, std::string quantity, double value, double reference, double tolerance,
            std::string provenance);
  /// Recorded as value 1/0 against reference 1.
  void holds(std::string check, std::string key, std::string quantity, bool ok, std::string provenance);
  void info(std::string check, std::string key, std::string quantity, double value, std::string provenance);
  void add(ResultRow row);

  /// Replaces every Pass/Fail verdict by Skip.
  void disable_checks();
  /// Rows sorted by (check, key, quantity).
  std::vector<ResultRow> sorted() const;
  const std::vector<ResultRow>& rows() const noexcept { return rows_; }
  bool all_pass() const;
  /// check -> (passed, failed) counts.
  std::map<std::string, std::pair<int, int>> tally() const;

 private:
  std::vector<ResultRow> rows_;
};

/// "%.17g" for finite values, "inf", "-inf" and "nan" otherwise.
std::string format_double(double v);
/// Short form for keys: "%.6g".
std::string format_key(double v);

std::string results_csv(const ResultSet& results);
std::string summary_text(const std::string& title, const ResultSet& results);
/// Parses a file written by results_csv. Throws ConfigInvalid on malformed input.
ResultSet read_results_csv(const std::filesystem::path& path);

}  // namespace cbounds::cli
