#pragma once

#include "sparse_recovery/checks.hpp"
#include "sparse_recovery/problem.hpp"
#include "sparse_recovery/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparse_recovery {

/// A grid of (d, s, m) cells, each run for `seeds_per_cell` seeded trials.
///
/// JSON schema (keys not listed take the defaults below):
///
///   {
///     "d": 128,                 // or "d_list": [64, 128]
///     "s_list": [5],
///     "m_list": [10, 20, 30],
///     "kind": "gaussian",       // gaussian | rademacher
///     "amplitude": "unit",      // unit | gaussian | uniform:<lo>:<hi>
///     "seeds_per_cell": 25,
///     "seed_base": 1,
///     "success_eps_rel": 1e-4,  // success iff final err2 <= eps * R
///     "identity_override": false,  // U = I (requires m == d)
///     "exact_rip_checks": false,   // feed exact RIP constants to the checks
///     "persist_traces": true,
///     "output_dir": "sweep_out",
///     "solver": {
///       "gamma": 0.25, "gamma_source": "explicit",  // explicit | oracle | plugin
///       "tau_mode": "plugin",                        // theorem | plugin | constant | list
///       "plugin_factor": 3.0, "tau_constant": 0.0, "tau_list": [],
///       "iterations": 100,       // or "eps_rel": 1e-6 to derive T from gamma
///       "stop_early": false, "oracle_budget": 1000000
///     }
///   }
struct ExperimentPlan {
  std::vector<Index> d_list{128};
  std::vector<Index> s_list{5};
  std::vector<Index> m_list{64};
  EnsembleKind kind = EnsembleKind::gaussian;
  Amplitude amplitude = Amplitude::unit();
  int seeds_per_cell = 1;
  std::uint64_t seed_base = 1;
  double success_eps_rel = 1e-4;
  bool identity_override = false;
  bool exact_rip_checks = false;
  bool persist_traces = true;
  std::filesystem::path output_dir = "sweep_out";
  RecoveryConfig solver;  // s and R are set per trial
  std::optional<double> eps_rel;

  void validate() const;
  static ExperimentPlan from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Cell {
  Index d = 0;
  Index s = 0;
  Index m = 0;
};

std::vector<Cell> cells_of(const ExperimentPlan& plan);

/// seed_base + hash(d, s, m, trial).
std::uint64_t trial_seed(const ExperimentPlan& plan, const Cell& cell, int trial);

std::string trial_name(const Cell& cell, int trial);

/// Per-trial numbers that everything downstream aggregates.
struct TrialSummary {
  Cell cell;
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  bool success = false;
  double final_err2_rel = 0.0;
  std::optional<double> decay_ratio;
  bool support_bound_all = false;
  bool all_verdicts_pass = false;
  int iterations = 0;
};

struct TrialResult {
  TrialSummary summary;
  std::optional<IterateTrace> trace;
  std::optional<CheckReport> report;
  std::string failure;
  double wall_seconds = 0.0;
};

/// Generates the cell's problem for this trial, recovers, checks, and (when
/// the plan persists traces) writes the trace CSV and problem descriptor.
TrialResult run_trial(const ExperimentPlan& plan, const Cell& cell, int trial);

/// Median over t of err2_{t+2} / err2_t, skipping t with err2_t == 0.
std::optional<double> empirical_decay_ratio(const std::vector<double>& err2);

struct CellSummary {
  Cell cell;
  int trials = 0;
  int failures = 0;
  double success_fraction = 0.0;
  std::optional<double> median_final_err2_rel;
  std::optional<double> median_decay_ratio;
  double verdict_pass_fraction = 0.0;
  double support_bound_fraction = 0.0;
  double wall_mean = 0.0;
  double wall_max = 0.0;
};

struct SweepResult {
  std::vector<CellSummary> cells;
  std::vector<TrialSummary> trials;
};

/// Aggregates per-trial summaries cell by cell, in plan order.
std::vector<CellSummary> aggregate(const ExperimentPlan& plan,
                                   const std::vector<TrialSummary>& trials);

/// Runs every cell x seed (in parallel), then writes plan.json, trials.csv,
/// summary.csv and summary.json under output_dir. Wall-clock figures go only
/// to timing.log.
SweepResult run_sweep(const ExperimentPlan& plan);

/// Rebuilds the sweep tables from the persisted traces and descriptors.
SweepResult reaggregate(const ExperimentPlan& plan);

void write_trials_csv(std::ostream& out, const std::vector<TrialSummary>& trials);
void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells);
nlohmann::json summary_json(const std::vector<CellSummary>& cells);

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

}  // namespace sparse_recovery
