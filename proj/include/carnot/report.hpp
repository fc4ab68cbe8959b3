#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace carnot {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparator = "<=";  // how value relates to threshold when passing
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;
  /// Extra plot-ready rows for this suite's CSV: first entry is the header.
  std::vector<std::vector<std::string>> table;

  bool passed() const;
  CheckResult& add(std::string name, bool pass, double value, double threshold,
                   std::string comparator = "<=", std::string detail = "");
};

/// Shortest round-trip decimal form (deterministic, locale-free).
std::string format_double(double v);

nlohmann::ordered_json suite_to_json(const SuiteResult& s);

/// Writes report.json, summary.csv and one CSV per suite into out_dir.
/// Returns true when every check passed.
bool write_bundle(const std::string& out_dir, const nlohmann::ordered_json& config,
                  const std::vector<SuiteResult>& suites);

/// Byte-wise comparison of two report bundles (same file set and contents).
bool bundles_identical(const std::string& dir_a, const std::string& dir_b);

}  // namespace carnot
