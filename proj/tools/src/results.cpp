#include "cbounds_cli/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "cbounds/errors.hpp"

namespace cbounds::cli {

namespace {

constexpr const char* kHeader = "check,key,quantity,value,reference,tolerance,provenance,pass";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && !s.empty(), ErrorCode::ConfigInvalid, where + ": not a number: '" + s + "'");
  return v;
}

Verdict parse_verdict(const std::string& s, const std::string& where) {
  for (Verdict v : {Verdict::Pass, Verdict::Fail, Verdict::Info, Verdict::Skip})
    if (s == to_string(v)) return v;
  fail(ErrorCode::ConfigInvalid, where + ": unknown verdict '" + s + "'");
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Info: return "info";
    case Verdict::Skip: return "skip";
  }
  return "info";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_key(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void ResultSet::add(ResultRow row) { rows_.push_back(std::move(row)); }

void ResultSet::at_most(std::string check, std::string key, std::string quantity, double value, double reference,
                        double tolerance, std::string provenance) {
  const bool ok = value <= reference + tolerance;
  add({std::move(check), std::move(key), std::move(quantity), value, reference, tolerance, std::move(provenance),
       ok ? Verdict::Pass : Verdict::Fail});
}

void ResultSet::near(std::string check, std::string key, std::string quantity, double value, double reference,
                     double tolerance, std::string provenance) {
  const bool ok = std::abs(value - reference) <= tolerance;
  add({std::move(check), std::move(key), std::move(quantity), value, reference, tolerance, std::move(provenance),
       ok ? Verdict::Pass : Verdict::Fail});
}

void ResultSet::holds(std::string check, std::string key, std::string quantity, bool ok, std::string provenance) {
  add({std::move(check), std::move(key), std::move(quantity), ok ? 1.0 : 0.0, 1.0, 0.0, std::move(provenance),
       ok ? Verdict::Pass : Verdict::Fail});
}

void ResultSet::info(std::string check, std::string key, std::string quantity, double value, std::string provenance) {
  add({std::move(check), std::move(key), std::move(quantity), value, std::numeric_limits<double>::quiet_NaN(), 0.0,
       std::move(provenance), Verdict::Info});
}

void ResultSet::disable_checks() {
  for (auto& r : rows_)
    if (r.verdict == Verdict::Pass || r.verdict == Verdict::Fail) r.verdict = Verdict::Skip;
}

std::vector<ResultRow> ResultSet::sorted() const {
  std::vector<ResultRow> out = rows_;
  std::stable_sort(out.begin(), out.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.check, a.key, a.quantity) < std::tie(b.check, b.key, b.quantity);
  });
  return out;
}

bool ResultSet::all_pass() const {
  return std::none_of(rows_.begin(), rows_.end(), [](const ResultRow& r) { return r.verdict == Verdict::Fail; });
}

std::map<std::string, std::pair<int, int>> ResultSet::tally() const {
  std::map<std::string, std::pair<int, int>> out;
  for (const auto& r : rows_) {
    auto& t = out[r.check];
    if (r.verdict == Verdict::Pass) ++t.first;
    if (r.verdict == Verdict::Fail) ++t.second;
  }
  return out;
}

std::string results_csv(const ResultSet& results) {
  std::string out = kHeader;
  out += '\n';
  for (const auto& r : results.sorted()) {
    out += csv_field(r.check) + ',' + csv_field(r.key) + ',' + csv_field(r.quantity) + ',' + format_double(r.value) +
           ',' + format_double(r.reference) + ',' + format_double(r.tolerance) + ',' + csv_field(r.provenance) + ',' +
           std::string(to_string(r.verdict)) + '\n';
  }
  return out;
}

std::string summary_text(const std::string& title, const ResultSet& results) {
  std::ostringstream os;
  os << title << '\n';
  int failed_checks = 0;
  for (const auto& [check, counts] : results.tally()) {
    const auto [pass, fail] = counts;
    const char* verdict = fail > 0 ? "FAIL" : (pass > 0 ? "PASS" : "INFO");
    if (fail > 0) ++failed_checks;
    os << "  " << verdict << "  " << check << "  (" << pass << " passed, " << fail << " failed)\n";
  }
  for (const auto& r : results.sorted())
    if (r.verdict == Verdict::Fail)
      os << "  failure: " << r.check << " [" << r.key << "] " << r.quantity << " = " << format_double(r.value)
         << " vs " << format_double(r.reference) << " (tol " << format_double(r.tolerance) << ")\n";
  os << (failed_checks == 0 ? "all checks passed\n" : std::to_string(failed_checks) + " check(s) failed\n");
  return os.str();
}

ResultSet read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ConfigInvalid, "inputs: cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kHeader, ErrorCode::ConfigInvalid,
          "inputs: " + path.string() + " has an unexpected header");
  ResultSet out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto f = split_csv_line(line);
    require(f.size() == 8, ErrorCode::ConfigInvalid, where + ": expected 8 columns");
    out.add({f[0], f[1], f[2], parse_double(f[3], where), parse_double(f[4], where), parse_double(f[5], where), f[6],
             parse_verdict(f[7], where)});
  }
  return out;
}

}  // namespace cbounds::cli
