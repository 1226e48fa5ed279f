#pragma once

#include "sparse_recovery/rip_oracle.hpp"
#include "sparse_recovery/solver.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sparse_recovery {

/// Relative slack applied to the right-hand side of every floating-point
/// inequality verdict.
inline constexpr double kVerdictSlack = 1e-9;

struct OffsupportCount {
  std::size_t count = 0;
  double threshold = 0.0;
  bool ok = true;
  /// Same count with the leading constant theta_ss + theta_ss + gamma, the
  /// form printed in the theorem statement (the proof ends with
  /// theta_ss + delta_s + gamma, which is what `count` uses).
  std::size_t count_stated_constant = 0;
  double threshold_stated_constant = 0.0;
};

/// Counts entries of v = (1 + gamma) x_t - U^T U (x_t - x_*) off the support
/// of x_* whose magnitude exceeds (theta_ss + delta_s + gamma) / sqrt(s) *
/// ||x_t - x_*||_2; ok when at most s do. Throws std::invalid_argument without
/// RIP constants.
OffsupportCount check_offsupport_count(const Vector& x_t, const Vector& truth, const Matrix& U,
                                       double gamma, Index s,
                                       const std::optional<RipConstants>& rip);

struct SupportStep {
  int t = 1;
  std::size_t support_size = 0;
  std::size_t union_size = 0;  // |S_t u S_*|
  bool support_bound_ok = true;
  std::optional<std::size_t> union3_size;  // |S_* u S_t u S_{t+1}|
  std::optional<bool> union3_ok;
  std::optional<double> tau_threshold;  // (theta_ss + delta_s + gamma)/sqrt(s) ||x_t - x_*||
  std::optional<bool> tau_admissible;
  /// Support hypothesis and tau admissibility at t imply both cardinality
  /// bounds at t + 1.
  std::optional<bool> corollary_ok;
};

std::vector<SupportStep> check_support_evolution(const std::vector<IterateRecord>& iterates,
                                                 const Vector& truth, Index s, double gamma,
                                                 const std::optional<RipConstants>& rip);

/// (4 gamma)^((t - 1)/2) R, evaluated in the log domain.
double decay_envelope(int t, double gamma, double R);

struct DecayStep {
  int t = 1;
  double err2 = 0.0;
  double err1 = 0.0;
  double envelope = 0.0;
  bool decay2_ok = true;      // err2 <= envelope
  bool decay1_ok = true;      // err1 <= sqrt(s) envelope
  bool decay1_2s_ok = true;   // err1 <= sqrt(2s) envelope
  std::optional<bool> recurrence_ok;  // err2_{t+1}^2 <= 4 gamma max(err2_t^2, envelope^2)
};

struct DecayCheck {
  bool applicable = true;  // false when gamma > 1/4
  std::vector<DecayStep> steps;
};

DecayCheck check_decay(const std::vector<IterateRecord>& iterates, const Vector& truth,
                       double gamma, double R, Index s);

/// Every verdict for one iterate, recomputed from the raw iterates.
struct IterationCheck {
  int t = 1;
  std::optional<double> tau;
  std::size_t support_size = 0;
  std::size_t union_size = 0;
  bool support_bound_ok = true;
  std::optional<std::size_t> union3_size;
  std::optional<bool> union3_ok;
  std::optional<OffsupportCount> offsupport;  // only when |S_t u S_*| <= 2s
  std::optional<double> tau_threshold;
  std::optional<bool> tau_admissible;
  std::optional<bool> corollary_ok;
  double err2 = 0.0;
  double err1 = 0.0;
  double envelope = 0.0;
  bool decay2_ok = true;
  bool decay1_ok = true;
  bool decay1_2s_ok = true;
  /// err1 <= sqrt(|S_t u S_*|) err2, which gives the sqrt(2s) bound.
  bool l1_implication_ok = true;
  std::optional<bool> recurrence_ok;
  /// The guarantee's hypotheses hold up to this iterate: gamma <= 1/4,
  /// gamma >= max(delta_3s, theta_ss + delta_s), ||x_*|| <= R, and every
  /// earlier tau matched the schedule.
  bool applicable = false;
};

struct CheckReport {
  double gamma = 0.0;
  Index s = 1;
  double R = 0.0;
  double truth_norm = 0.0;
  std::optional<RipConstants> rip;
  bool gamma_admissible = false;        // gamma <= 1/4
  std::optional<bool> rip_hypothesis;   // gamma >= max(delta_3s, theta_ss + delta_s)
  std::vector<IterationCheck> iterations;
  /// One entry per failed verdict that the hypotheses in force guarantee.
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  bool support_bound_everywhere() const;
  /// Every measured verdict true, guaranteed or not (the sqrt(s) l1 variant
  /// is excluded).
  bool all_measured_pass() const;
};

CheckReport verify_trace(const std::vector<IterateRecord>& iterates, const Vector& truth,
                         const Matrix& U, double gamma, Index s, double R,
                         const std::optional<RipConstants>& rip);

nlohmann::json to_json(const CheckReport& report);

/// Compact "name=0|1" list joined by ';' for the trace CSV.
std::string verdict_token(const IterationCheck& check);

}  // namespace sparse_recovery
