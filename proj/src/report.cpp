#include "carnot/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>

#include "carnot/group.hpp"

namespace carnot {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

bool SuiteResult::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

CheckResult& SuiteResult::add(std::string name, bool pass, double value, double threshold,
                              std::string comparator, std::string detail) {
  checks.push_back(CheckResult{std::move(name), pass, value, threshold,
                               std::move(comparator), std::move(detail)});
  return checks.back();
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json suite_to_json(const SuiteResult& s) {
  json j;
  j["suite"] = s.suite;
  j["pass"] = s.passed();
  json checks = json::array();
  for (const auto& c : s.checks) {
    json cj;
    cj["name"] = c.name;
    cj["pass"] = c.pass;
    cj["value"] = c.value;
    cj["threshold"] = c.threshold;
    cj["comparator"] = c.comparator;
    if (!c.detail.empty()) cj["detail"] = c.detail;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  return j;
}

namespace {

void write_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << row[i];
    }
    out << "\n";
  }
}

}  // namespace

bool write_bundle(const std::string& out_dir, const json& config,
                  const std::vector<SuiteResult>& suites) {
  fs::create_directories(out_dir);
  bool all_pass = true;

  json report;
  report["config"] = config;
  report["config_hash"] = format_double(0);  // replaced below
  {
    uint64_t h = fnv1a64(config.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    report["config_hash"] = std::string(buf);
  }
  json jsuites = json::array();
  std::vector<std::vector<std::string>> summary{
      {"suite", "check", "pass", "value", "threshold", "comparator", "detail"}};
  for (const auto& s : suites) {
    jsuites.push_back(suite_to_json(s));
    if (!s.passed()) all_pass = false;
    for (const auto& c : s.checks)
      summary.push_back({s.suite, c.name, c.pass ? "1" : "0", format_double(c.value),
                         format_double(c.threshold), c.comparator, c.detail});
    if (!s.table.empty()) write_csv(out_dir + "/" + s.suite + ".csv", s.table);
  }
  report["suites"] = jsuites;
  report["pass"] = all_pass;

  std::ofstream rj(out_dir + "/report.json");
  rj << report.dump(2) << "\n";
  write_csv(out_dir + "/summary.csv", summary);
  return all_pass;
}

bool bundles_identical(const std::string& dir_a, const std::string& dir_b) {
  auto slurp_all = [](const std::string& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path(), std::ios::binary);
      std::string data((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
      files[fs::relative(e.path(), dir).string()] = std::move(data);
    }
    return files;
  };
  return slurp_all(dir_a) == slurp_all(dir_b);
}

}  // namespace carnot
