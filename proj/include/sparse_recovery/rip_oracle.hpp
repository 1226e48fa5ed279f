#pragma once

#include "sparse_recovery/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace sparse_recovery {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1'000'000;

enum class RipMethod { exact, monte_carlo };
std::string to_string(RipMethod method);

/// Restricted isometry / orthogonality constants of one matrix at level s.
struct RipEstimate {
  Index s = 0;
  double delta = 0.0;
  std::optional<double> theta;  // absent when 2s > d
  RipMethod method = RipMethod::exact;
  std::uint64_t subsets_examined = 0;
};

nlohmann::json to_json(const RipEstimate& estimate);

/// n choose k, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Number of unordered pairs of disjoint s-subsets of [d] (saturating).
std::uint64_t disjoint_pair_count(std::uint64_t d, std::uint64_t s);

/// delta_s = max over |T| = s of ||U_T^T U_T - I||_2, by exhaustive
/// enumeration. Throws BudgetExceeded when C(d, s) > budget.
double delta_exact(const Matrix& U, Index s, std::uint64_t budget = kDefaultEnumerationBudget);

/// theta_{s,s} = max over disjoint |T| = |T'| = s of ||U_T^T U_T'||_2.
/// Requires 2s <= d.
double theta_exact(const Matrix& U, Index s, std::uint64_t budget = kDefaultEnumerationBudget);

/// Result of a sampled maximization. `exhaustive` is set when the trial count
/// covered every subset (pair) and the value is therefore exact.
struct SampledMaximum {
  double value = 0.0;
  std::uint64_t examined = 0;
  bool exhaustive = false;
};

/// Lower bounds on delta_s / theta_{s,s} from `trials` uniformly drawn
/// subsets (pairs), deduplicated.
SampledMaximum delta_sampled(const Matrix& U, Index s, std::uint64_t trials, std::uint64_t seed);
SampledMaximum theta_sampled(const Matrix& U, Index s, std::uint64_t trials, std::uint64_t seed);

RipEstimate estimate_rip_exact(const Matrix& U, Index s,
                               std::uint64_t budget = kDefaultEnumerationBudget);
RipEstimate estimate_rip_sampled(const Matrix& U, Index s, std::uint64_t trials,
                                 std::uint64_t seed);

/// The constants the recovery guarantees are stated in.
struct RipConstants {
  double delta_s = 0.0;
  double theta_ss = 0.0;
  std::optional<double> delta_3s;

  /// max(delta_3s, theta_ss + delta_s); needs delta_3s.
  double theorem_gamma() const;
};

/// Exact delta_s, theta_{s,s} and delta_{3s}; the last is taken at
/// min(3s, d) because no larger column subsets exist.
RipConstants exact_rip_constants(const Matrix& U, Index s,
                                 std::uint64_t budget = kDefaultEnumerationBudget);

}  // namespace sparse_recovery
