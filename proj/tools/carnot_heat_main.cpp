#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "carnot/experiments.hpp"

namespace {

void print_suite(const carnot::SuiteResult& s) {
  for (const auto& c : s.checks)
    std::printf("  [%s] %-42s %s %s (threshold %s %s)\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.detail.empty() ? "value" : c.detail.c_str(),
                carnot::format_double(c.value).c_str(), c.comparator.c_str(),
                carnot::format_double(c.threshold).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carnot-heat: numerical verification toolkit for heat-type operators "
               "on homogeneous groups"};
  app.require_subcommand(1);

  std::string config_path, out_dir, group, suite = "all", group_out;
  uint64_t seed = 0;
  bool have_seed = false;

  auto* run = app.add_subcommand("run", "run every verification suite from a config file");
  run->add_option("--config", config_path, "JSON or TOML configuration")->required();
  run->add_option("--out-dir", out_dir, "override the report directory");
  auto* run_seed = run->add_option("--seed", seed, "override the RNG seed");

  auto* verify = app.add_subcommand("verify", "run one suite with default settings");
  verify->add_option("--suite", suite, "group|fields|seminorm|energy|holder|counterexample|all")
      ->required();
  verify->add_option("--group", group, "built-in group name (r1, r2, heis)");
  auto* verify_seed = verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--out-dir", out_dir, "report directory");

  auto* groupcmd = app.add_subcommand("group", "print a built-in group as JSON");
  groupcmd->add_option("--name", group, "group name")->required();
  groupcmd->add_option("--out", group_out, "write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("group")) {
      std::string text = carnot::group_to_json(carnot::group_by_name(group));
      if (group_out.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream out(group_out);
        out << text << "\n";
      }
      return 0;
    }

    carnot::ExperimentConfig cfg;
    if (app.got_subcommand("run")) {
      cfg = carnot::ExperimentConfig::from_file(config_path);
      have_seed = run_seed->count() > 0;
    } else {
      have_seed = verify_seed->count() > 0;
      if (!group.empty()) cfg.group = group;
    }
    if (have_seed) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();

    if (app.got_subcommand("run") || suite == "all") {
      carnot::RunAllResult res = carnot::run_all(cfg, true);
      for (const auto& s : res.suites) {
        std::printf("suite %s: %s\n", s.suite.c_str(), s.passed() ? "PASS" : "FAIL");
        print_suite(s);
      }
      std::printf("reports written to %s\n", cfg.out_dir.c_str());
      return res.pass ? 0 : 1;
    }

    carnot::SuiteResult s = carnot::run_suite(suite, cfg);
    carnot::write_bundle(cfg.out_dir, cfg.to_json(), {s});
    std::printf("suite %s: %s\n", s.suite.c_str(), s.passed() ? "PASS" : "FAIL");
    print_suite(s);
    std::printf("reports written to %s\n", cfg.out_dir.c_str());
    return s.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
