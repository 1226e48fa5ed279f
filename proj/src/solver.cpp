#include "sparse_recovery/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace sparse_recovery {

Vector approx_gradient(const Matrix& U, const Vector& y, const Vector& x) {
  if (U.cols() != x.size() || U.rows() != y.size()) {
    throw std::invalid_argument("approx_gradient: U is " + std::to_string(U.rows()) + "x" +
                                std::to_string(U.cols()) + ", y has " + std::to_string(y.size()) +
                                " entries, x has " + std::to_string(x.size()));
  }
  const Vector residual = U * x - y;
  return U.transpose() * residual;
}

Vector soft_threshold(const Vector& v, double threshold) {
  if (!(threshold >= 0.0)) {
    throw std::invalid_argument("soft_threshold: threshold must be nonnegative");
  }
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double magnitude = std::abs(v[i]);
    out[i] = magnitude > threshold ? std::copysign(magnitude - threshold, v[i]) : 0.0;
  }
  return out;
}

Vector prox_step(const Vector& x, const Vector& grad, double tau, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("prox_step: gamma must be nonnegative");
  if (!(tau >= 0.0)) throw std::invalid_argument("prox_step: tau must be nonnegative");
  if (x.size() != grad.size()) throw std::invalid_argument("prox_step: dimension mismatch");
  const double scale = 1.0 + gamma;
  return soft_threshold(x - grad / scale, tau / scale);
}

double tau_schedule_scaled(int t, double gamma, double constant, Index s, double R) {
  if (t < 1) throw std::invalid_argument("tau_schedule: t must be >= 1");
  if (s < 1) throw std::invalid_argument("tau_schedule: s must be >= 1");
  if (!(gamma >= 0.0) || !(constant >= 0.0) || !(R >= 0.0)) {
    throw std::invalid_argument("tau_schedule: constants must be nonnegative");
  }
  const double decay = std::pow(4.0 * gamma, 0.5 * (t - 1));
  return constant / std::sqrt(static_cast<double>(s)) * decay * R;
}

double tau_schedule(int t, double gamma, double theta_ss, double delta_s, Index s, double R) {
  if (!(theta_ss >= 0.0) || !(delta_s >= 0.0)) {
    throw std::invalid_argument("tau_schedule: RIP constants must be nonnegative");
  }
  return tau_schedule_scaled(t, gamma, theta_ss + delta_s + gamma, s, R);
}

Vector exact_gradient_step(const Vector& x, const Vector& truth) {
  if (x.size() != truth.size()) throw std::invalid_argument("exact_gradient_step: dimension mismatch");
  const Vector gradient = x - truth;
  return x - gradient;
}

int iterations_for_accuracy(double R, double eps, double gamma) {
  if (!(eps > 0.0) || !(R >= 0.0)) {
    throw std::invalid_argument("iterations_for_accuracy: need eps > 0 and R >= 0");
  }
  if (!(gamma >= 0.0) || !(gamma < 0.25)) {
    throw std::invalid_argument(
        "iterations_for_accuracy: gamma must lie in [0, 1/4); give the iteration count explicitly");
  }
  if (gamma == 0.0 || R <= eps) return 1;
  const double steps = std::ceil(2.0 * std::log(R / eps) / std::log(1.0 / (4.0 * gamma)));
  return static_cast<int>(std::max(0.0, steps)) + 1;
}

std::string to_string(GammaSource source) {
  switch (source) {
    case GammaSource::explicit_value: return "explicit";
    case GammaSource::rip_oracle: return "oracle";
    case GammaSource::plugin: return "plugin";
  }
  return "unknown";
}

std::string to_string(TauMode mode) {
  switch (mode) {
    case TauMode::theorem: return "theorem";
    case TauMode::theorem_plugin: return "plugin";
    case TauMode::constant: return "constant";
    case TauMode::explicit_list: return "list";
  }
  return "unknown";
}

GammaSource parse_gamma_source(std::string_view name) {
  if (name == "explicit") return GammaSource::explicit_value;
  if (name == "oracle") return GammaSource::rip_oracle;
  if (name == "plugin") return GammaSource::plugin;
  throw std::invalid_argument("unknown gamma source '" + std::string(name) + "'");
}

TauMode parse_tau_mode(std::string_view name) {
  if (name == "theorem") return TauMode::theorem;
  if (name == "plugin") return TauMode::theorem_plugin;
  if (name == "constant") return TauMode::constant;
  if (name == "list") return TauMode::explicit_list;
  throw std::invalid_argument("unknown tau mode '" + std::string(name) + "'");
}

void RecoveryConfig::validate() const {
  if (gamma_source == GammaSource::explicit_value && !(gamma >= 0.0 && std::isfinite(gamma))) {
    throw std::invalid_argument("gamma must be finite and nonnegative");
  }
  if (s < 1) throw std::invalid_argument("sparsity s must be >= 1");
  if (!(R >= 0.0) || !std::isfinite(R)) throw std::invalid_argument("R must be finite and >= 0");
  if (iterations < 1) throw std::invalid_argument("iteration count T must be >= 1");
  switch (tau_mode) {
    case TauMode::theorem:
      if (!rip && gamma_source != GammaSource::rip_oracle) {
        throw std::invalid_argument(
            "theorem tau schedule needs RIP constants: supply them or use the oracle gamma source");
      }
      break;
    case TauMode::theorem_plugin:
      if (!(plugin_factor >= 0.0)) throw std::invalid_argument("plugin factor must be >= 0");
      break;
    case TauMode::constant:
      if (!(tau_constant >= 0.0)) throw std::invalid_argument("constant tau must be >= 0");
      break;
    case TauMode::explicit_list:
      if (tau_list.size() < static_cast<std::size_t>(iterations)) {
        throw std::invalid_argument("tau list has " + std::to_string(tau_list.size()) +
                                    " entries, need " + std::to_string(iterations));
      }
      for (double tau : tau_list) {
        if (!(tau >= 0.0)) throw std::invalid_argument("tau list entries must be >= 0");
      }
      break;
  }
}

ResolvedSchedule resolve_schedule(const RecoveryConfig& config, const Matrix& U) {
  config.validate();
  ResolvedSchedule schedule;
  schedule.rip = config.rip;
  switch (config.gamma_source) {
    case GammaSource::explicit_value: schedule.gamma = config.gamma; break;
    case GammaSource::plugin: schedule.gamma = 0.25; break;
    case GammaSource::rip_oracle:
      schedule.rip = exact_rip_constants(U, config.s, config.oracle_budget);
      schedule.gamma = schedule.rip->theorem_gamma();
      break;
  }

  schedule.taus.reserve(static_cast<std::size_t>(config.iterations));
  for (int t = 1; t <= config.iterations; ++t) {
    double tau = 0.0;
    switch (config.tau_mode) {
      case TauMode::theorem:
        tau = tau_schedule(t, schedule.gamma, schedule.rip->theta_ss, schedule.rip->delta_s,
                           config.s, config.R);
        break;
      case TauMode::theorem_plugin:
        tau = tau_schedule_scaled(t, schedule.gamma, config.plugin_factor * schedule.gamma,
                                  config.s, config.R);
        break;
      case TauMode::constant: tau = config.tau_constant; break;
      case TauMode::explicit_list: tau = config.tau_list[static_cast<std::size_t>(t - 1)]; break;
    }
    schedule.taus.push_back(tau);
  }
  return schedule;
}

std::vector<double> IterateTrace::taus() const {
  std::vector<double> out;
  for (const auto& record : iterates) {
    if (record.tau) out.push_back(*record.tau);
  }
  return out;
}

IterateTrace recover(const MeasurementEnsemble& ensemble, const RecoveryConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Matrix& U = ensemble.matrix();
  const Vector& y = ensemble.measurements();
  const ResolvedSchedule schedule = resolve_schedule(config, U);

  IterateTrace trace;
  trace.config = config;
  trace.gamma = schedule.gamma;
  trace.rip = schedule.rip;
  trace.iterates.reserve(schedule.taus.size() + 1);

  Vector x = Vector::Zero(U.cols());
  trace.iterates.push_back({1, x, {}, std::nullopt, std::nullopt, std::nullopt});

  const int T = config.iterations;
  for (int t = 1; t <= T; ++t) {
    const double tau = schedule.taus[static_cast<std::size_t>(t - 1)];
    Vector next = prox_step(x, approx_gradient(U, y, x), tau, schedule.gamma);
    if (!next.allFinite()) {
      throw NumericalFailure(t + 1, "non-finite iterate at t=" + std::to_string(t + 1));
    }
    trace.iterates.back().tau = tau;

    const bool unchanged = next == x;
    trace.iterates.push_back({t + 1, next, support_of(next), std::nullopt, std::nullopt, std::nullopt});
    x = std::move(next);

    if (config.stop_early && unchanged && t < T) {
      const auto rest = schedule.taus.begin() + t;
      if (std::all_of(rest, schedule.taus.end(), [tau](double v) { return v == tau; })) {
        trace.stopped_early = true;
        break;
      }
    }
  }

  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

IterateTrace recover(const MeasurementEnsemble& ensemble, const RecoveryConfig& config,
                     const Vector& truth) {
  IterateTrace trace = recover(ensemble, config);
  annotate_errors(trace, truth);
  return trace;
}

void annotate_errors(IterateTrace& trace, const Vector& truth) {
  for (auto& record : trace.iterates) {
    if (record.x.size() != truth.size()) {
      throw std::invalid_argument("annotate_errors: dimension mismatch");
    }
    const Vector diff = record.x - truth;
    record.err2 = diff.norm();
    record.err1 = diff.lpNorm<1>();
  }
}

}  // namespace sparse_recovery
