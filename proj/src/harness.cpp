#include "sparse_recovery/harness.hpp"

#include "sparse_recovery/io.hpp"
#include "sparse_recovery/trace_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace sparse_recovery {

namespace {

std::vector<Index> index_list(const nlohmann::json& j, const char* key) {
  return j.at(key).get<std::vector<Index>>();
}

nlohmann::json solver_to_json(const RecoveryConfig& config, const std::optional<double>& eps_rel) {
  nlohmann::json j;
  j["gamma"] = config.gamma;
  j["gamma_source"] = to_string(config.gamma_source);
  j["tau_mode"] = to_string(config.tau_mode);
  j["plugin_factor"] = config.plugin_factor;
  j["tau_constant"] = config.tau_constant;
  j["tau_list"] = config.tau_list;
  if (eps_rel) {
    j["eps_rel"] = *eps_rel;
  } else {
    j["iterations"] = config.iterations;
  }
  j["stop_early"] = config.stop_early;
  j["oracle_budget"] = config.oracle_budget;
  if (config.rip) {
    j["delta_s"] = config.rip->delta_s;
    j["theta_ss"] = config.rip->theta_ss;
    if (config.rip->delta_3s) j["delta_3s"] = *config.rip->delta_3s;
  }
  return j;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string json_number(const std::optional<double>& value) {
  return value && std::isfinite(*value) ? format_double(*value) : std::string();
}

}  // namespace

void ExperimentPlan::validate() const {
  if (d_list.empty() || s_list.empty() || m_list.empty()) {
    throw std::invalid_argument("plan: d, s_list and m_list must be non-empty");
  }
  for (Index d : d_list) {
    if (d < 1) throw std::invalid_argument("plan: every d must be >= 1");
    for (Index s : s_list) {
      if (s < 1 || s > d) throw std::invalid_argument("plan: every s must satisfy 1 <= s <= d");
    }
  }
  for (Index m : m_list) {
    if (m < 1) throw std::invalid_argument("plan: every m must be >= 1 (m = 0 has no measurements)");
    if (identity_override) {
      for (Index d : d_list) {
        if (m != d) throw std::invalid_argument("plan: identity_override needs m == d");
      }
    }
  }
  if (!identity_override && kind == EnsembleKind::explicit_matrix) {
    throw std::invalid_argument("plan: explicit ensembles need identity_override");
  }
  if (seeds_per_cell < 1) throw std::invalid_argument("plan: seeds_per_cell must be >= 1");
  if (!(success_eps_rel > 0.0)) throw std::invalid_argument("plan: success_eps_rel must be > 0");
  if (eps_rel) {
    if (!(*eps_rel > 0.0)) throw std::invalid_argument("plan: solver.eps_rel must be > 0");
    if (solver.gamma_source == GammaSource::rip_oracle) {
      throw std::invalid_argument("plan: eps_rel needs a known gamma; give iterations explicitly");
    }
    const double gamma = solver.gamma_source == GammaSource::plugin ? 0.25 : solver.gamma;
    iterations_for_accuracy(1.0, *eps_rel, gamma);
  }
  RecoveryConfig probe = solver;
  probe.s = s_list.front();
  probe.R = 1.0;
  if (eps_rel) probe.iterations = 1;
  if (probe.tau_mode == TauMode::explicit_list) probe.iterations = static_cast<int>(probe.tau_list.size());
  probe.validate();
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j) {
  ExperimentPlan plan;
  if (j.contains("d_list")) {
    plan.d_list = index_list(j, "d_list");
  } else {
    plan.d_list = {j.at("d").get<Index>()};
  }
  plan.s_list = index_list(j, "s_list");
  plan.m_list = index_list(j, "m_list");
  plan.kind = parse_ensemble_kind(j.value("kind", std::string("gaussian")));
  plan.amplitude = parse_amplitude(j.value("amplitude", std::string("unit")));
  plan.seeds_per_cell = j.value("seeds_per_cell", 1);
  plan.seed_base = j.value("seed_base", std::uint64_t{1});
  plan.success_eps_rel = j.value("success_eps_rel", 1e-4);
  plan.identity_override = j.value("identity_override", false);
  plan.exact_rip_checks = j.value("exact_rip_checks", false);
  plan.persist_traces = j.value("persist_traces", true);
  plan.output_dir = j.value("output_dir", std::string("sweep_out"));
  if (plan.identity_override) plan.kind = EnsembleKind::explicit_matrix;

  const auto solver = j.value("solver", nlohmann::json::object());
  auto& config = plan.solver;
  config.gamma = solver.value("gamma", 0.25);
  config.gamma_source = parse_gamma_source(solver.value("gamma_source", std::string("explicit")));
  config.tau_mode = parse_tau_mode(solver.value("tau_mode", std::string("plugin")));
  config.plugin_factor = solver.value("plugin_factor", 3.0);
  config.tau_constant = solver.value("tau_constant", 0.0);
  config.tau_list = solver.value("tau_list", std::vector<double>{});
  config.stop_early = solver.value("stop_early", false);
  config.oracle_budget = solver.value("oracle_budget", kDefaultEnumerationBudget);
  if (solver.contains("delta_s") && solver.contains("theta_ss")) {
    RipConstants rip;
    rip.delta_s = solver.at("delta_s").get<double>();
    rip.theta_ss = solver.at("theta_ss").get<double>();
    if (solver.contains("delta_3s")) rip.delta_3s = solver.at("delta_3s").get<double>();
    config.rip = rip;
  }
  if (solver.contains("eps_rel")) {
    plan.eps_rel = solver.at("eps_rel").get<double>();
  } else {
    config.iterations = solver.value("iterations", 100);
  }
  plan.validate();
  return plan;
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json j;
  j["d_list"] = d_list;
  j["s_list"] = s_list;
  j["m_list"] = m_list;
  j["kind"] = to_string(kind);
  j["amplitude"] = to_string(amplitude);
  j["seeds_per_cell"] = seeds_per_cell;
  j["seed_base"] = seed_base;
  j["success_eps_rel"] = success_eps_rel;
  j["identity_override"] = identity_override;
  j["exact_rip_checks"] = exact_rip_checks;
  j["persist_traces"] = persist_traces;
  j["output_dir"] = output_dir.string();
  j["solver"] = solver_to_json(solver, eps_rel);
  return j;
}

std::vector<Cell> cells_of(const ExperimentPlan& plan) {
  std::vector<Cell> cells;
  for (Index d : plan.d_list)
    for (Index s : plan.s_list)
      for (Index m : plan.m_list) cells.push_back({d, s, m});
  return cells;
}

std::uint64_t trial_seed(const ExperimentPlan& plan, const Cell& cell, int trial) {
  std::uint64_t h = derive_seed(static_cast<std::uint64_t>(cell.d), static_cast<std::uint64_t>(cell.s));
  h = derive_seed(h, static_cast<std::uint64_t>(cell.m));
  h = derive_seed(h, static_cast<std::uint64_t>(trial));
  return plan.seed_base + h;
}

std::string trial_name(const Cell& cell, int trial) {
  char buffer[96];
  std::snprintf(buffer, sizeof buffer, "d%lld_s%lld_m%lld_trial%03d", static_cast<long long>(cell.d),
                static_cast<long long>(cell.s), static_cast<long long>(cell.m), trial);
  return buffer;
}

std::optional<double> empirical_decay_ratio(const std::vector<double>& err2) {
  std::vector<double> ratios;
  for (std::size_t t = 0; t + 2 < err2.size(); ++t) {
    if (err2[t] > 0.0) ratios.push_back(err2[t + 2] / err2[t]);
  }
  if (ratios.empty()) return std::nullopt;
  return median(std::move(ratios));
}

namespace {

bool verdicts_all_pass(const std::string& token) {
  // Mirrors CheckReport::all_measured_pass: everything except the sqrt(s)
  // l1 variant and the applicability flag.
  std::istringstream in(token);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    const auto name = item.substr(0, eq);
    if (name == "decay1" || name == "applicable") continue;
    if (item.substr(eq + 1) != "1") return false;
  }
  return true;
}

bool verdict_value(const std::string& token, const std::string& name) {
  const auto key = name + "=";
  std::istringstream in(token);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.rfind(key, 0) == 0) return item.substr(key.size()) == "1";
  }
  return false;
}

}  // namespace

TrialResult run_trial(const ExperimentPlan& plan, const Cell& cell, int trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  auto& summary = result.summary;
  summary.cell = cell;
  summary.trial = trial;
  summary.seed = trial_seed(plan, cell, trial);

  std::optional<ProblemInstance> problem;
  if (plan.identity_override) {
    SparseSignal signal = generate_signal(cell.d, cell.s, plan.amplitude, signal_seed(summary.seed));
    auto ensemble = MeasurementEnsemble::from_matrix(Matrix::Identity(cell.d, cell.d), signal);
    problem.emplace(ProblemInstance{std::move(signal), std::move(ensemble)});
  } else {
    problem.emplace(generate_problem(cell.d, cell.s, cell.m, plan.kind, plan.amplitude, summary.seed));
  }
  const auto& signal = problem->signal;
  const auto& ensemble = problem->ensemble;

  RecoveryConfig config = plan.solver;
  config.s = cell.s;
  config.R = signal.norm_bound();
  if (plan.eps_rel) {
    const double gamma = config.gamma_source == GammaSource::plugin ? 0.25 : config.gamma;
    config.iterations = iterations_for_accuracy(1.0, *plan.eps_rel, gamma);
  }
  summary.iterations = config.iterations;

  const auto name = trial_name(cell, trial);
  auto descriptor = to_json(ProblemDescriptor::describe(signal, ensemble, summary.seed, plan.amplitude));
  descriptor["trial"] = trial;

  try {
    IterateTrace trace = recover(ensemble, config, signal.values());
    std::optional<RipConstants> rip = trace.rip;
    if (plan.exact_rip_checks && !rip) {
      rip = exact_rip_constants(ensemble.matrix(), cell.s, config.oracle_budget);
    }
    CheckReport report = verify_trace(trace.iterates, signal.values(), ensemble.matrix(),
                                      trace.gamma, cell.s, config.R, rip);

    std::vector<double> err2;
    for (const auto& record : trace.iterates) err2.push_back(*record.err2);
    summary.final_err2_rel = err2.back() / config.R;
    summary.success = err2.back() <= plan.success_eps_rel * config.R;
    summary.decay_ratio = empirical_decay_ratio(err2);
    summary.support_bound_all = report.support_bound_everywhere();
    summary.all_verdicts_pass = report.all_measured_pass();

    if (plan.persist_traces) {
      save_trace_csv(plan.output_dir / "traces" / (name + ".csv"), trace.iterates, &signal.values(),
                     &report);
    }
    result.trace = std::move(trace);
    result.report = std::move(report);
  } catch (const NumericalFailure& e) {
    summary.failed = true;
    summary.final_err2_rel = std::numeric_limits<double>::quiet_NaN();
    result.failure = e.what();
  }

  descriptor["failed"] = summary.failed;
  if (plan.persist_traces) save_json(plan.output_dir / "problems" / (name + ".json"), descriptor);

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<CellSummary> aggregate(const ExperimentPlan& plan,
                                   const std::vector<TrialSummary>& trials) {
  std::vector<CellSummary> out;
  for (const auto& cell : cells_of(plan)) {
    CellSummary summary;
    summary.cell = cell;
    std::vector<double> finals;
    std::vector<double> ratios;
    int successes = 0, verdicts = 0, supports = 0;
    for (const auto& trial : trials) {
      if (trial.cell.d != cell.d || trial.cell.s != cell.s || trial.cell.m != cell.m) continue;
      ++summary.trials;
      if (trial.failed) {
        ++summary.failures;
        continue;
      }
      successes += trial.success;
      verdicts += trial.all_verdicts_pass;
      supports += trial.support_bound_all;
      finals.push_back(trial.final_err2_rel);
      if (trial.decay_ratio) ratios.push_back(*trial.decay_ratio);
    }
    if (summary.trials > 0) {
      summary.success_fraction = static_cast<double>(successes) / summary.trials;
      summary.verdict_pass_fraction = static_cast<double>(verdicts) / summary.trials;
      summary.support_bound_fraction = static_cast<double>(supports) / summary.trials;
    }
    if (!finals.empty()) summary.median_final_err2_rel = median(finals);
    if (!ratios.empty()) summary.median_decay_ratio = median(ratios);
    out.push_back(summary);
  }
  return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialSummary>& trials) {
  out << "d,s,m,trial,seed,failed,success,final_err2_rel,decay_ratio,support_bound_all,"
         "all_verdicts_pass,iterations\n";
  for (const auto& t : trials) {
    out << t.cell.d << ',' << t.cell.s << ',' << t.cell.m << ',' << t.trial << ',' << t.seed << ','
        << t.failed << ',' << t.success << ','
        << (t.failed ? std::string() : format_double(t.final_err2_rel)) << ','
        << json_number(t.decay_ratio) << ',' << t.support_bound_all << ',' << t.all_verdicts_pass
        << ',' << t.iterations << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "d,s,m,trials,failures,success_fraction,median_final_err2_rel,median_decay_ratio,"
         "verdict_pass_fraction,support_bound_fraction\n";
  for (const auto& c : cells) {
    out << c.cell.d << ',' << c.cell.s << ',' << c.cell.m << ',' << c.trials << ',' << c.failures
        << ',' << format_double(c.success_fraction) << ',' << json_number(c.median_final_err2_rel)
        << ',' << json_number(c.median_decay_ratio) << ',' << format_double(c.verdict_pass_fraction)
        << ',' << format_double(c.support_bound_fraction) << '\n';
  }
}

nlohmann::json summary_json(const std::vector<CellSummary>& cells) {
  auto optional_number = [](const std::optional<double>& v) {
    return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : cells) {
    rows.push_back({{"d", c.cell.d},
                    {"s", c.cell.s},
                    {"m", c.cell.m},
                    {"trials", c.trials},
                    {"failures", c.failures},
                    {"success_fraction", c.success_fraction},
                    {"median_final_err2_rel", optional_number(c.median_final_err2_rel)},
                    {"median_decay_ratio", optional_number(c.median_decay_ratio)},
                    {"verdict_pass_fraction", c.verdict_pass_fraction},
                    {"support_bound_fraction", c.support_bound_fraction}});
  }
  return {{"cells", rows}};
}

SweepResult run_sweep(const ExperimentPlan& plan) {
  plan.validate();
  const auto cells = cells_of(plan);
  const auto per_cell = static_cast<std::size_t>(plan.seeds_per_cell);
  const std::size_t total = cells.size() * per_cell;

  std::filesystem::create_directories(plan.output_dir);
  std::vector<TrialSummary> trials(total);
  std::vector<double> wall(total, 0.0);
  parallel_for(total, [&](std::size_t k) {
    auto result = run_trial(plan, cells[k / per_cell], static_cast<int>(k % per_cell));
    trials[k] = result.summary;
    wall[k] = result.wall_seconds;
  });

  SweepResult sweep;
  sweep.trials = trials;
  sweep.cells = aggregate(plan, trials);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = sweep.cells[c];
    double sum = 0.0;
    for (std::size_t k = c * per_cell; k < (c + 1) * per_cell; ++k) {
      sum += wall[k];
      cell.wall_max = std::max(cell.wall_max, wall[k]);
    }
    cell.wall_mean = sum / static_cast<double>(per_cell);
  }

  save_json(plan.output_dir / "plan.json", plan.to_json());
  {
    std::ofstream out(plan.output_dir / "trials.csv", std::ios::binary);
    write_trials_csv(out, sweep.trials);
  }
  {
    std::ofstream out(plan.output_dir / "summary.csv", std::ios::binary);
    write_summary_csv(out, sweep.cells);
  }
  save_json(plan.output_dir / "summary.json", summary_json(sweep.cells));
  {
    std::ofstream log(plan.output_dir / "timing.log", std::ios::binary);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    log << "finished_unix_time " << now << '\n';
    for (const auto& cell : sweep.cells) {
      log << "d=" << cell.cell.d << " s=" << cell.cell.s << " m=" << cell.cell.m
          << " wall_mean=" << cell.wall_mean << " wall_max=" << cell.wall_max << '\n';
    }
  }
  return sweep;
}

SweepResult reaggregate(const ExperimentPlan& plan) {
  if (!plan.persist_traces) throw std::invalid_argument("reaggregate: the plan did not persist traces");
  const auto cells = cells_of(plan);
  SweepResult sweep;
  for (const auto& cell : cells) {
    for (int trial = 0; trial < plan.seeds_per_cell; ++trial) {
      const auto name = trial_name(cell, trial);
      const auto descriptor = load_json(plan.output_dir / "problems" / (name + ".json"));
      TrialSummary summary;
      summary.cell = cell;
      summary.trial = trial;
      summary.seed = descriptor.at("seed").is_null() ? trial_seed(plan, cell, trial)
                                                     : descriptor.at("seed").get<std::uint64_t>();
      summary.failed = descriptor.value("failed", false);
      if (!summary.failed) {
        const double R = descriptor.at("R").get<double>();
        const auto rows = load_trace_csv(plan.output_dir / "traces" / (name + ".csv"));
        std::vector<double> err2;
        summary.support_bound_all = true;
        summary.all_verdicts_pass = true;
        for (const auto& row : rows) {
          err2.push_back(*row.record.err2);
          summary.support_bound_all = summary.support_bound_all && verdict_value(row.verdicts, "support");
          summary.all_verdicts_pass = summary.all_verdicts_pass && verdicts_all_pass(row.verdicts);
        }
        summary.final_err2_rel = err2.back() / R;
        summary.success = err2.back() <= plan.success_eps_rel * R;
        summary.decay_ratio = empirical_decay_ratio(err2);
        summary.iterations = static_cast<int>(rows.size()) - 1;
      } else {
        summary.final_err2_rel = std::numeric_limits<double>::quiet_NaN();
      }
      sweep.trials.push_back(summary);
    }
  }
  sweep.cells = aggregate(plan, sweep.trials);
  return sweep;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  const std::size_t n = xs.size();
  auto ranks = [n](std::span<const double> v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double average = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = average;
      i = j + 1;
    }
    return rank;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace sparse_recovery
