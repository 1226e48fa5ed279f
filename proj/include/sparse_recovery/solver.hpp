#pragma once

#include "sparse_recovery/problem.hpp"
#include "sparse_recovery/rip_oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sparse_recovery {

/// U^T (U x - y), evaluated as two matrix-vector products.
Vector approx_gradient(const Matrix& U, const Vector& y, const Vector& x);

/// Componentwise sign(v) * max(|v| - threshold, 0).
Vector soft_threshold(const Vector& v, double threshold);

/// Minimizer of tau ||z||_1 + <z - x, grad> + (1 + gamma)/2 ||z - x||^2,
/// i.e. soft_threshold(x - grad / (1 + gamma), tau / (1 + gamma)).
Vector prox_step(const Vector& x, const Vector& grad, double tau, double gamma);

/// ((theta_ss + delta_s + gamma) / sqrt(s)) * (4 gamma)^((t - 1) / 2) * R.
double tau_schedule(int t, double gamma, double theta_ss, double delta_s, Index s, double R);

/// Same geometric schedule with an arbitrary leading constant in place of
/// theta_ss + delta_s + gamma.
double tau_schedule_scaled(int t, double gamma, double constant, Index s, double R);

/// Gradient step on 1/2 ||x - x_*||^2 with unit step; lands on x_*.
Vector exact_gradient_step(const Vector& x, const Vector& truth);

/// Smallest T with (4 gamma)^(T/2) R <= eps, plus one:
/// ceil(2 ln(R / eps) / ln(1 / (4 gamma))) + 1. Needs 0 <= gamma < 1/4.
int iterations_for_accuracy(double R, double eps, double gamma);

enum class GammaSource {
  explicit_value,  // RecoveryConfig::gamma as given
  rip_oracle,      // max(delta_3s, theta_ss + delta_s) from the exact oracle
  plugin,          // the constant 1/4
};

enum class TauMode {
  theorem,         // leading constant theta_ss + delta_s + gamma; needs RIP constants
  theorem_plugin,  // leading constant plugin_factor * gamma (3 gamma by default)
  constant,        // tau_t = tau_constant for every t
  explicit_list,   // tau_t = tau_list[t - 1]
};

std::string to_string(GammaSource source);
std::string to_string(TauMode mode);
GammaSource parse_gamma_source(std::string_view name);
TauMode parse_tau_mode(std::string_view name);

struct RecoveryConfig {
  double gamma = 0.25;
  GammaSource gamma_source = GammaSource::explicit_value;
  TauMode tau_mode = TauMode::theorem_plugin;
  double plugin_factor = 3.0;
  double tau_constant = 0.0;
  std::vector<double> tau_list;
  /// RIP constants for TauMode::theorem when not computed by the oracle.
  std::optional<RipConstants> rip;
  Index s = 1;
  double R = 1.0;
  int iterations = 100;
  /// Stop once x_{t+1} == x_t and every remaining tau equals tau_t.
  bool stop_early = false;
  std::uint64_t oracle_budget = kDefaultEnumerationBudget;

  void validate() const;
};

/// The concrete gamma and tau_1..tau_T a config resolves to for one matrix.
struct ResolvedSchedule {
  double gamma = 0.0;
  std::vector<double> taus;
  std::optional<RipConstants> rip;
};

ResolvedSchedule resolve_schedule(const RecoveryConfig& config, const Matrix& U);

struct IterateRecord {
  int t = 1;
  Vector x;
  Support support;
  /// Threshold parameter used to produce x_{t+1}; absent on the final iterate.
  std::optional<double> tau;
  std::optional<double> err2;
  std::optional<double> err1;
};

struct IterateTrace {
  std::vector<IterateRecord> iterates;  // x_1 .. x_{T+1}
  RecoveryConfig config;
  double gamma = 0.0;
  std::optional<RipConstants> rip;
  bool stopped_early = false;
  double wall_seconds = 0.0;

  const Vector& final_iterate() const { return iterates.back().x; }
  std::vector<double> taus() const;
};

/// Runs the composite gradient iteration from x_1 = 0. The ensemble's
/// measurements are the only information about the signal it uses.
IterateTrace recover(const MeasurementEnsemble& ensemble, const RecoveryConfig& config);

/// Same, then fills err2/err1 against `truth`.
IterateTrace recover(const MeasurementEnsemble& ensemble, const RecoveryConfig& config,
                     const Vector& truth);

/// err2 = ||x_t - truth||_2, err1 = ||x_t - truth||_1 for every iterate.
void annotate_errors(IterateTrace& trace, const Vector& truth);

}  // namespace sparse_recovery
