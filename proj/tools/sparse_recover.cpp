// sparse_recover: command-line front end for the sparse_recovery library.
//
//   gen      draw a seeded problem and write U, x, y and a JSON descriptor
//   recover  run the thresholded gradient iteration and write a trace CSV
//   rip      estimate delta_s / theta_{s,s} of a matrix
//   verify   recheck every verdict of a trace against ground truth
//   sweep    run an experiment plan (see harness.hpp for the schema)

#include "sparse_recovery/checks.hpp"
#include "sparse_recovery/harness.hpp"
#include "sparse_recovery/io.hpp"
#include "sparse_recovery/problem.hpp"
#include "sparse_recovery/rip_oracle.hpp"
#include "sparse_recovery/solver.hpp"
#include "sparse_recovery/trace_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace sparse_recovery;

namespace {

struct GenOptions {
  Index d = 64;
  Index s = 3;
  Index m = 40;
  std::string kind = "gaussian";
  std::string amplitude = "unit";
  std::uint64_t seed = 1;
  fs::path out_dir = ".";
};

struct RecoverOptions {
  std::string matrix, ensemble, y, truth, out;
  double gamma = 0.25;
  std::string gamma_source = "explicit";
  std::string tau_mode = "plugin";
  double plugin_factor = 3.0;
  std::optional<double> tau;
  std::vector<double> tau_list;
  std::optional<double> delta, theta, delta3s;
  std::optional<Index> s;
  std::optional<double> R;
  std::optional<int> T;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  bool stop_early = false;
  std::uint64_t budget = kDefaultEnumerationBudget;
};

struct RipOptions {
  std::string matrix;
  Index s = 1;
  std::string mode = "exact";
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  std::uint64_t budget = kDefaultEnumerationBudget;
};

struct VerifyOptions {
  std::string trace, truth, matrix, out;
  double gamma = 0.25;
  Index s = 1;
  std::optional<double> R;
  std::optional<double> delta, theta, delta3s;
  bool oracle = false;
  std::uint64_t budget = kDefaultEnumerationBudget;
};

struct SweepOptions {
  std::string plan;
  std::string out;
  std::optional<std::uint64_t> seed_base;
};

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    save_json(path, j);
  }
}

std::optional<RipConstants> supplied_rip(const std::optional<double>& delta,
                                         const std::optional<double>& theta,
                                         const std::optional<double>& delta3s) {
  if (!delta && !theta) return std::nullopt;
  if (!delta || !theta) throw std::invalid_argument("--delta and --theta go together");
  RipConstants rip;
  rip.delta_s = *delta;
  rip.theta_ss = *theta;
  rip.delta_3s = delta3s;
  return rip;
}

int run_gen(const GenOptions& o) {
  const auto amplitude = parse_amplitude(o.amplitude);
  const auto problem = generate_problem(o.d, o.s, o.m, parse_ensemble_kind(o.kind), amplitude, o.seed);
  fs::create_directories(o.out_dir);
  save_matrix_csv(o.out_dir / "U.csv", problem.ensemble.matrix());
  save_vector_csv(o.out_dir / "x.csv", problem.signal.values());
  save_vector_csv(o.out_dir / "y.csv", problem.ensemble.measurements());
  save_json(o.out_dir / "problem.json",
            to_json(ProblemDescriptor::describe(problem.signal, problem.ensemble, o.seed, amplitude)));
  return 0;
}

int run_recover(const RecoverOptions& o) {
  std::optional<MeasurementEnsemble> ensemble;
  std::optional<Vector> truth;
  std::optional<double> R = o.R;
  Index s = 0;

  if (!o.ensemble.empty()) {
    auto descriptor = descriptor_from_json(load_json(o.ensemble));
    if (o.seed) descriptor.seed = o.seed;
    if (!descriptor.seed) throw std::invalid_argument("--ensemble descriptor has no seed; pass --seed");
    auto problem = generate_problem(descriptor.d, descriptor.s, descriptor.m, descriptor.kind,
                                    descriptor.amplitude, *descriptor.seed);
    ensemble.emplace(std::move(problem.ensemble));
    truth = problem.signal.values();
    if (!R) R = problem.signal.norm_bound();
    s = descriptor.s;
  } else {
    if (o.matrix.empty() || o.y.empty()) {
      throw std::invalid_argument("recover needs --ensemble, or --matrix together with --y");
    }
    ensemble.emplace(load_matrix_csv(o.matrix), load_vector_csv(o.y), EnsembleKind::explicit_matrix);
  }
  if (!o.truth.empty()) truth = load_vector_csv(o.truth);
  if (o.s) s = *o.s;
  if (s < 1) throw std::invalid_argument("--s is required");
  if (!R) {
    if (!truth) throw std::invalid_argument("--R is required without ground truth");
    R = truth->norm();
  }

  RecoveryConfig config;
  config.gamma = o.gamma;
  config.gamma_source = parse_gamma_source(o.gamma_source);
  config.tau_mode = parse_tau_mode(o.tau_mode);
  config.plugin_factor = o.plugin_factor;
  if (o.tau) config.tau_constant = *o.tau;
  config.tau_list = o.tau_list;
  config.rip = supplied_rip(o.delta, o.theta, o.delta3s);
  config.s = s;
  config.R = *R;
  config.stop_early = o.stop_early;
  config.oracle_budget = o.budget;
  if (o.T && o.eps) throw std::invalid_argument("give --T or --eps, not both");
  if (o.T) {
    config.iterations = *o.T;
  } else if (o.eps) {
    const double gamma = config.gamma_source == GammaSource::plugin ? 0.25 : config.gamma;
    config.iterations = iterations_for_accuracy(*R, *o.eps, gamma);
  } else if (config.tau_mode == TauMode::explicit_list) {
    config.iterations = static_cast<int>(config.tau_list.size());
  }

  IterateTrace trace = truth ? recover(*ensemble, config, *truth) : recover(*ensemble, config);
  std::optional<CheckReport> report;
  if (truth) {
    report = verify_trace(trace.iterates, *truth, ensemble->matrix(), trace.gamma, s, *R, trace.rip);
  }
  if (o.out.empty()) {
    write_trace_csv(std::cout, trace.iterates, truth ? &*truth : nullptr, report ? &*report : nullptr);
  } else {
    save_trace_csv(o.out, trace.iterates, truth ? &*truth : nullptr, report ? &*report : nullptr);
  }

  std::cerr << "iterations " << trace.iterates.size() - 1 << ", gamma " << format_double(trace.gamma);
  if (truth) {
    std::cerr << ", final err2/R " << format_double(*trace.iterates.back().err2 / *R);
  }
  std::cerr << '\n';
  return 0;
}

int run_rip(const RipOptions& o) {
  const Matrix U = load_matrix_csv(o.matrix);
  RipEstimate estimate;
  if (o.mode == "exact") {
    estimate = estimate_rip_exact(U, o.s, o.budget);
  } else if (o.mode == "sampled") {
    estimate = estimate_rip_sampled(U, o.s, o.trials, o.seed);
  } else {
    throw std::invalid_argument("--mode must be exact or sampled");
  }
  std::cout << to_json(estimate).dump(2) << '\n';
  return 0;
}

int run_verify(const VerifyOptions& o) {
  const auto rows = load_trace_csv(o.trace);
  const auto iterates = records_of(rows);
  const Vector truth = load_vector_csv(o.truth);
  const Matrix U = load_matrix_csv(o.matrix);
  const double R = o.R ? *o.R : truth.norm();

  std::optional<RipConstants> rip = supplied_rip(o.delta, o.theta, o.delta3s);
  if (o.oracle) {
    if (rip) throw std::invalid_argument("--oracle replaces --delta/--theta");
    rip = exact_rip_constants(U, o.s, o.budget);
  }
  const auto report = verify_trace(iterates, truth, U, o.gamma, o.s, R, rip);
  write_json(to_json(report), o.out);
  return report.passed() ? 0 : 1;
}

int run_sweep_command(const SweepOptions& o) {
  auto plan = ExperimentPlan::from_json(load_json(o.plan));
  if (!o.out.empty()) plan.output_dir = o.out;
  if (o.seed_base) plan.seed_base = *o.seed_base;
  const auto result = run_sweep(plan);
  int failures = 0;
  for (const auto& cell : result.cells) failures += cell.failures;
  std::cerr << result.trials.size() << " trials in " << result.cells.size() << " cells written to "
            << plan.output_dir.string();
  if (failures > 0) std::cerr << " (" << failures << " failed numerically)";
  std::cerr << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery by thresholded gradient iteration"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Draw a seeded problem instance");
  gen_cmd->add_option("--d", gen.d, "Signal dimension")->required();
  gen_cmd->add_option("--s", gen.s, "Sparsity")->required();
  gen_cmd->add_option("--m", gen.m, "Number of measurements")->required();
  gen_cmd->add_option("--kind", gen.kind, "gaussian | rademacher");
  gen_cmd->add_option("--amplitude", gen.amplitude, "unit | gaussian | uniform:<lo>:<hi>");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out-dir", gen.out_dir, "Where U.csv, x.csv, y.csv, problem.json go");

  RecoverOptions rec;
  auto* rec_cmd = app.add_subcommand("recover", "Recover a sparse signal and write its trace");
  rec_cmd->add_option("--matrix", rec.matrix, "Measurement matrix CSV (m rows)");
  rec_cmd->add_option("--ensemble", rec.ensemble, "Problem descriptor JSON to regenerate from");
  rec_cmd->add_option("--y", rec.y, "Measurement vector CSV");
  rec_cmd->add_option("--truth", rec.truth, "Ground truth CSV, for tracing only");
  rec_cmd->add_option("--gamma", rec.gamma);
  rec_cmd->add_option("--gamma-source", rec.gamma_source, "explicit | oracle | plugin");
  rec_cmd->add_option("--tau-mode", rec.tau_mode, "theorem | plugin | constant | list");
  rec_cmd->add_option("--plugin-factor", rec.plugin_factor, "Leading constant in units of gamma");
  rec_cmd->add_option("--tau", rec.tau, "Constant tau for --tau-mode constant");
  rec_cmd->add_option("--tau-list", rec.tau_list, "tau_1 .. tau_T for --tau-mode list")->delimiter(',');
  rec_cmd->add_option("--delta", rec.delta, "delta_s for --tau-mode theorem");
  rec_cmd->add_option("--theta", rec.theta, "theta_{s,s} for --tau-mode theorem");
  rec_cmd->add_option("--delta3s", rec.delta3s);
  rec_cmd->add_option("--s", rec.s);
  rec_cmd->add_option("--R", rec.R, "Bound on ||x||_2");
  rec_cmd->add_option("--T", rec.T, "Iterations");
  rec_cmd->add_option("--eps", rec.eps, "Target accuracy; derives T from gamma");
  rec_cmd->add_option("--seed", rec.seed, "Overrides the descriptor seed");
  rec_cmd->add_option("--out", rec.out, "Trace CSV (default stdout)");
  rec_cmd->add_option("--budget", rec.budget, "Enumeration budget for --gamma-source oracle");
  rec_cmd->add_flag("--stop-early", rec.stop_early);

  RipOptions rip;
  auto* rip_cmd = app.add_subcommand("rip", "Restricted isometry constants of a matrix");
  rip_cmd->add_option("--matrix", rip.matrix)->required();
  rip_cmd->add_option("--s", rip.s)->required();
  rip_cmd->add_option("--mode", rip.mode, "exact | sampled");
  rip_cmd->add_option("--trials", rip.trials, "Subsets drawn in sampled mode");
  rip_cmd->add_option("--seed", rip.seed);
  rip_cmd->add_option("--budget", rip.budget, "Enumeration budget in exact mode");

  VerifyOptions ver;
  auto* ver_cmd = app.add_subcommand("verify", "Recheck a trace against ground truth");
  ver_cmd->add_option("--trace", ver.trace)->required();
  ver_cmd->add_option("--truth", ver.truth)->required();
  ver_cmd->add_option("--matrix", ver.matrix)->required();
  ver_cmd->add_option("--gamma", ver.gamma)->required();
  ver_cmd->add_option("--s", ver.s)->required();
  ver_cmd->add_option("--R", ver.R, "Defaults to ||truth||_2");
  ver_cmd->add_option("--delta", ver.delta);
  ver_cmd->add_option("--theta", ver.theta);
  ver_cmd->add_option("--delta3s", ver.delta3s);
  ver_cmd->add_flag("--oracle", ver.oracle, "Compute the constants by exact enumeration");
  ver_cmd->add_option("--budget", ver.budget);
  ver_cmd->add_option("--out", ver.out, "Report JSON (default stdout)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment plan");
  sweep_cmd->add_option("--plan", sweep.plan, "Plan JSON")->required();
  sweep_cmd->add_option("--out", sweep.out, "Overrides the plan's output_dir");
  sweep_cmd->add_option("--seed-base", sweep.seed_base, "Overrides the plan's seed_base");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*rec_cmd) return run_recover(rec);
    if (*rip_cmd) return run_rip(rip);
    if (*ver_cmd) return run_verify(ver);
    if (*sweep_cmd) return run_sweep_command(sweep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
