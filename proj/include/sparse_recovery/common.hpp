#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparse_recovery {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Sorted, duplicate-free list of coordinate indices.
using Support = std::vector<Index>;

/// Indices of the nonzero entries of x, in increasing order.
Support support_of(const Vector& x);

std::size_t union_size(const Support& a, const Support& b);
std::size_t union_size(const Support& a, const Support& b, const Support& c);

/// Raised when an exact enumeration would exceed its subset budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterate stops being finite.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(int iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// splitmix64 finalizer applied to (base, stream); used to fan one seed out
/// into independent generator seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Worker count: SPARSE_RECOVER_THREADS if set and positive, else the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. Each index is
/// visited exactly once; the first exception thrown is rethrown after all
/// workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sparse_recovery
