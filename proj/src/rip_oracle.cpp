#include "sparse_recovery/rip_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace sparse_recovery {

std::string to_string(RipMethod method) {
  return method == RipMethod::exact ? "exact" : "monte-carlo";
}

nlohmann::json to_json(const RipEstimate& estimate) {
  nlohmann::json j;
  j["s"] = estimate.s;
  j["delta"] = estimate.delta;
  j["theta"] = estimate.theta ? nlohmann::json(*estimate.theta) : nlohmann::json(nullptr);
  j["method"] = to_string(estimate.method);
  j["subsets_examined"] = estimate.subsets_examined;
  return j;
}

namespace {

__extension__ using u128 = unsigned __int128;
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturate(u128 value) {
  return value > kSaturated ? kSaturated : static_cast<std::uint64_t>(value);
}

}  // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  u128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i is exact at every step.
    result = result * (n - k + i) / i;
    if (result > kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t disjoint_pair_count(std::uint64_t d, std::uint64_t s) {
  if (2 * s > d) return 0;
  const std::uint64_t first = binomial(d, s);
  const std::uint64_t second = binomial(d - s, s);
  if (first == kSaturated || second == kSaturated) return kSaturated;
  return saturate(static_cast<u128>(first) * second / 2);
}

namespace {

using Combination = std::vector<Index>;

bool next_combination(Combination& c, Index n) {
  const auto k = static_cast<Index>(c.size());
  for (Index i = k - 1; i >= 0; --i) {
    auto& slot = c[static_cast<std::size_t>(i)];
    if (slot < n - k + i) {
      ++slot;
      for (Index j = i + 1; j < k; ++j) {
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      }
      return true;
    }
  }
  return false;
}

// The rank-th k-subset of [n] in lexicographic order.
Combination unrank_combination(std::uint64_t rank, Index n, Index k) {
  Combination c;
  c.reserve(static_cast<std::size_t>(k));
  Index x = 0;
  for (Index i = 0; i < k; ++i) {
    while (true) {
      const auto count = binomial(static_cast<std::uint64_t>(n - x - 1),
                                  static_cast<std::uint64_t>(k - i - 1));
      if (rank < count) break;
      rank -= count;
      ++x;
    }
    c.push_back(x++);
  }
  return c;
}

// Maximum of eval over all k-subsets of [n], split into contiguous rank
// chunks. The maximum does not depend on how chunks are scheduled.
template <class Eval>
double max_over_subsets(Index n, Index k, std::uint64_t total, const Eval& eval) {
  if (total == 0) return 0.0;
  const std::uint64_t chunks = std::min<std::uint64_t>(total, worker_count() * 8);
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t chunk) {
    const auto begin = static_cast<std::uint64_t>(static_cast<u128>(total) * chunk / chunks);
    const auto end = static_cast<std::uint64_t>(static_cast<u128>(total) * (chunk + 1) / chunks);
    Combination c = unrank_combination(begin, n, k);
    double best = 0.0;
    for (std::uint64_t r = begin; r < end; ++r) {
      best = std::max(best, eval(c));
      next_combination(c, n);
    }
    partial[chunk] = best;
  });
  return *std::max_element(partial.begin(), partial.end());
}

void require_finite(const Matrix& U) {
  if (U.size() == 0) throw std::invalid_argument("matrix must be non-empty");
  if (!U.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
}

// Largest |eigenvalue| of G_TT - I.
double isometry_deviation(const Matrix& gram, const Combination& T) {
  const auto k = static_cast<Index>(T.size());
  if (k == 1) return std::abs(gram(T[0], T[0]) - 1.0);

  Matrix block = gram(T, T);
  block.diagonal().array() -= 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(block, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  const double value = std::max(std::abs(ev[0]), std::abs(ev[k - 1]));

  if (k == 2) {
    // Closed form for the 2x2 symmetric block as an internal cross-check.
    const double a = block(0, 0), b = block(0, 1), c = block(1, 1);
    const double mean = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    const double closed = std::abs(mean) + radius;
    if (std::abs(closed - value) > 1e-10 * (1.0 + value)) {
      throw std::logic_error("2x2 eigenvalue cross-check failed");
    }
  }
  return value;
}

// Largest singular value of G_{T,T'}.
double orthogonality_deviation(const Matrix& gram, const Combination& T, const Combination& Tp) {
  const auto k = static_cast<Index>(T.size());
  if (k == 1) return std::abs(gram(T[0], Tp[0]));

  const Matrix cross = gram(T, Tp);
  Eigen::JacobiSVD<Matrix> svd(cross);
  const double value = svd.singularValues()[0];

  if (k == 2) {
    const double fro2 = cross.squaredNorm();
    const double det = cross.determinant();
    const double closed = std::sqrt(0.5 * (fro2 + std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det))));
    if (std::abs(closed - value) > 1e-10 * (1.0 + value)) {
      throw std::logic_error("2x2 singular-value cross-check failed");
    }
  }
  return value;
}

void validate_delta_args(const Matrix& U, Index s) {
  require_finite(U);
  if (s < 1 || s > U.cols()) {
    throw std::invalid_argument("delta requires 1 <= s <= d (s=" + std::to_string(s) +
                                ", d=" + std::to_string(U.cols()) + ")");
  }
}

void validate_theta_args(const Matrix& U, Index s) {
  require_finite(U);
  if (s < 1 || 2 * s > U.cols()) {
    throw std::invalid_argument("theta requires 1 <= s and 2s <= d (s=" + std::to_string(s) +
                                ", d=" + std::to_string(U.cols()) + ")");
  }
}

// Visits every unordered pair {T, T'} of disjoint s-subsets once, as the
// ordered pair with T[0] < T'[0]; parallel over the rank of T.
double scan_theta(const Matrix& gram, Index s) {
  const Index d = gram.cols();
  const auto outer = binomial(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s));
  return max_over_subsets(d, s, outer, [&](const Combination& T) {
    Combination pool;
    for (Index j = T[0] + 1; j < d; ++j) {
      if (!std::binary_search(T.begin(), T.end(), j)) pool.push_back(j);
    }
    const auto p = static_cast<Index>(pool.size());
    if (p < s) return 0.0;
    Combination pick(static_cast<std::size_t>(s));
    std::iota(pick.begin(), pick.end(), Index{0});
    Combination Tp(static_cast<std::size_t>(s));
    double best = 0.0;
    do {
      for (std::size_t i = 0; i < pick.size(); ++i) Tp[i] = pool[static_cast<std::size_t>(pick[i])];
      best = std::max(best, orthogonality_deviation(gram, T, Tp));
    } while (next_combination(pick, p));
    return best;
  });
}

Combination random_subset(std::vector<Index>& scratch, Index k, std::mt19937_64& rng) {
  const auto n = static_cast<Index>(scratch.size());
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(scratch[static_cast<std::size_t>(i)], scratch[static_cast<std::size_t>(pick(rng))]);
  }
  return Combination(scratch.begin(), scratch.begin() + k);
}

}  // namespace

double delta_exact(const Matrix& U, Index s, std::uint64_t budget) {
  validate_delta_args(U, s);
  const Index d = U.cols();
  const auto total = binomial(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s));
  if (total > budget) {
    throw BudgetExceeded("delta_exact: C(" + std::to_string(d) + ", " + std::to_string(s) +
                         ") subsets exceed the enumeration budget of " + std::to_string(budget) +
                         "; use delta_sampled for a lower bound");
  }
  const Matrix gram = U.transpose() * U;
  return max_over_subsets(d, s, total,
                          [&](const Combination& T) { return isometry_deviation(gram, T); });
}

double theta_exact(const Matrix& U, Index s, std::uint64_t budget) {
  validate_theta_args(U, s);
  const Index d = U.cols();
  const auto pairs = disjoint_pair_count(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s));
  if (pairs > budget) {
    throw BudgetExceeded("theta_exact: " + std::to_string(pairs) +
                         " disjoint subset pairs exceed the enumeration budget of " +
                         std::to_string(budget) + "; use theta_sampled for a lower bound");
  }
  const Matrix gram = U.transpose() * U;
  return scan_theta(gram, s);
}

SampledMaximum delta_sampled(const Matrix& U, Index s, std::uint64_t trials, std::uint64_t seed) {
  validate_delta_args(U, s);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const Index d = U.cols();
  const auto total = binomial(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s));
  const Matrix gram = U.transpose() * U;
  if (trials >= total) {
    const double value = max_over_subsets(
        d, s, total, [&](const Combination& T) { return isometry_deviation(gram, T); });
    return {value, total, true};
  }

  std::mt19937_64 rng(seed);
  std::vector<Index> scratch(static_cast<std::size_t>(d));
  std::iota(scratch.begin(), scratch.end(), Index{0});
  std::set<Combination> seen;
  double best = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    Combination T = random_subset(scratch, s, rng);
    std::sort(T.begin(), T.end());
    if (seen.insert(T).second) best = std::max(best, isometry_deviation(gram, T));
  }
  return {best, seen.size(), seen.size() == total};
}

SampledMaximum theta_sampled(const Matrix& U, Index s, std::uint64_t trials, std::uint64_t seed) {
  validate_theta_args(U, s);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const Index d = U.cols();
  const auto total = disjoint_pair_count(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s));
  const Matrix gram = U.transpose() * U;
  if (trials >= total) return {scan_theta(gram, s), total, true};

  std::mt19937_64 rng(seed);
  std::vector<Index> scratch(static_cast<std::size_t>(d));
  std::iota(scratch.begin(), scratch.end(), Index{0});
  std::set<Combination> seen;
  double best = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const Combination both = random_subset(scratch, 2 * s, rng);
    Combination T(both.begin(), both.begin() + s);
    Combination Tp(both.begin() + s, both.end());
    std::sort(T.begin(), T.end());
    std::sort(Tp.begin(), Tp.end());
    if (Tp[0] < T[0]) std::swap(T, Tp);
    Combination key = T;
    key.insert(key.end(), Tp.begin(), Tp.end());
    if (seen.insert(key).second) best = std::max(best, orthogonality_deviation(gram, T, Tp));
  }
  return {best, seen.size(), seen.size() == total};
}

RipEstimate estimate_rip_exact(const Matrix& U, Index s, std::uint64_t budget) {
  RipEstimate estimate;
  estimate.s = s;
  estimate.method = RipMethod::exact;
  estimate.delta = delta_exact(U, s, budget);
  estimate.subsets_examined =
      binomial(static_cast<std::uint64_t>(U.cols()), static_cast<std::uint64_t>(s));
  if (2 * s <= U.cols()) {
    estimate.theta = theta_exact(U, s, budget);
    estimate.subsets_examined +=
        disjoint_pair_count(static_cast<std::uint64_t>(U.cols()), static_cast<std::uint64_t>(s));
  }
  return estimate;
}

RipEstimate estimate_rip_sampled(const Matrix& U, Index s, std::uint64_t trials,
                                 std::uint64_t seed) {
  RipEstimate estimate;
  estimate.s = s;
  const auto delta = delta_sampled(U, s, trials, seed);
  estimate.delta = delta.value;
  estimate.subsets_examined = delta.examined;
  bool exhaustive = delta.exhaustive;
  if (2 * s <= U.cols()) {
    const auto theta = theta_sampled(U, s, trials, derive_seed(seed, 1));
    estimate.theta = theta.value;
    estimate.subsets_examined += theta.examined;
    exhaustive = exhaustive && theta.exhaustive;
  }
  estimate.method = exhaustive ? RipMethod::exact : RipMethod::monte_carlo;
  return estimate;
}

double RipConstants::theorem_gamma() const {
  if (!delta_3s) throw std::logic_error("theorem_gamma needs delta_3s");
  return std::max(*delta_3s, theta_ss + delta_s);
}

RipConstants exact_rip_constants(const Matrix& U, Index s, std::uint64_t budget) {
  RipConstants constants;
  constants.delta_s = delta_exact(U, s, budget);
  constants.theta_ss = theta_exact(U, s, budget);
  constants.delta_3s = delta_exact(U, std::min<Index>(3 * s, U.cols()), budget);
  return constants;
}

}  // namespace sparse_recovery
