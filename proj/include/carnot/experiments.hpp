#pragma once

#include "carnot/report.hpp"
#include "carnot/solver.hpp"

namespace carnot {

/// Knobs for the verification suites. Defaults reproduce the acceptance
/// runs; the quick() profile is a scaled-down variant exercising the same
/// code paths (used by the determinism check).
struct ExperimentConfig {
  std::string group = "heis";
  std::vector<int> lattice_ladder = {16, 24, 32};
  double nu = 0.25;
  uint64_t seed = 42;
  std::string id = "default";
  std::string out_dir = "reports";

  // group suite
  int axiom_samples = 10000;
  int norm_samples = 100000;
  int hormander_points = 100;

  // energy suite
  int energy_trials = 20;
  int energy_pieces = 64;
  int energy_n = 32;
  double energy_T = 0.5;
  int energy_steps = 64;

  // mollifier commutation
  std::vector<int> moll_lattice = {16, 24, 32};
  std::vector<double> eps_ladder = {0.30, 0.27, 0.25};
  double moll_T = 0.2;
  int moll_steps = 16;

  // Holder modulus / regularity transfer
  int holder_trials = 3;
  std::vector<int> holder_steps = {32, 64, 128};
  int holder_n = 24;
  double holder_T = 0.4;
  int transfer_trials = 10;
  int transfer_steps = 48;
  double transfer_T = 0.4;

  // seminorm suite
  int gain_fields = 10;
  int equivalence_fields = 20;

  // counterexample
  std::vector<double> alphas = {0.55, 0.75, 1.0};
  std::vector<int> counterexample_steps = {1250, 5000, 20000};
  int counterexample_n = 128;
  double counterexample_T = 0.4;
  int counterexample_pieces = 25;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ExperimentConfig from_json(const nlohmann::ordered_json& j);
  /// Reads .json or .toml (flat keys / one [section] level).
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig quick();
};

/// Coordinate box used for a group's lattices ([-pi,pi) per abelian axis;
/// (1,1,0.5) for heis).
Lattice default_lattice(const GroupSpec& spec, int n);

// ---- op-level entry points -----------------------------------------------------

struct CounterexampleReport {
  double alpha = 0.0;
  bool rough_path = false;
  double fitted_exponent = 0.0;
  double fit_r2 = 0.0;
  double l2_error = 0.0;           // finest rung, solver vs closed form
  std::vector<double> dt_ladder;   // per rung
  std::vector<double> errors;      // per rung
  double window_lo = 0.0, window_hi = 0.0;
};

/// Solves L U = F for U = t^alpha exp(-int a) sin x on the abelian line and
/// fits the time-Holder exponent near t = 0. alpha must exceed 1/2 (the
/// forcing leaves L2 otherwise).
CounterexampleReport run_counterexample(double alpha, const CoefficientPath& a,
                                        const ExperimentConfig& cfg);

struct HolderReport {
  std::vector<int> derivative;        // generator word, empty = u itself
  std::vector<double> dt_ladder;
  std::vector<double> modulus;        // per rung: sup over pairs
  std::vector<double> zero_trace;     // per rung: sup_t ||zeta D u(t)|| / sqrt(t)
  std::vector<std::pair<double, double>> pairs;
  double cutoff_r0 = 0.0, cutoff_r1 = 0.0;
  double fitted_exponent = 0.0;       // zero-trace exponent at the finest rung
  double fit_r2 = 0.0;
  bool stable = false;                // max/min across the dt ladder <= 1.5
};

std::vector<HolderReport> run_holder_modulus(const ExperimentConfig& cfg,
                                             const SpaceTimeFn& forcing,
                                             const std::vector<std::vector<int>>& orders,
                                             const CoefficientPath& path);

struct TransferReport {
  int k = 0;
  std::vector<int> lattice_ladder;
  std::vector<double> ratios;  // per rung
  bool stable = false;         // within +-20% of the rung mean
};

TransferReport run_regularity_transfer(const ExperimentConfig& cfg, int k, uint64_t seed);

struct MollifierReport {
  std::vector<double> eps_ladder;
  std::vector<int> lattice_ladder;
  // residual[e][n]: rms over evaluation times of the localized residual
  std::vector<std::vector<double>> residual;
  double eps_variation = 0.0;  // (max-min)/mean over eps at the finest lattice
  double min_shrink = 0.0;     // min over eps of coarsest/finest residual
};

MollifierReport run_mollifier_commutation(const ExperimentConfig& cfg);

// ---- suites ---------------------------------------------------------------------

SuiteResult suite_group(const ExperimentConfig& cfg);
SuiteResult suite_fields(const ExperimentConfig& cfg);
SuiteResult suite_seminorm(const ExperimentConfig& cfg);
SuiteResult suite_energy(const ExperimentConfig& cfg);
SuiteResult suite_holder(const ExperimentConfig& cfg);
SuiteResult suite_counterexample(const ExperimentConfig& cfg);

const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg);

struct RunAllResult {
  std::vector<SuiteResult> suites;
  bool pass = false;
};

/// Runs every suite and, when write_reports is set, writes the report
/// bundle (report.json, summary.csv, per-suite CSVs) to cfg.out_dir.
RunAllResult run_all(const ExperimentConfig& cfg, bool write_reports = true);

}  // namespace carnot
