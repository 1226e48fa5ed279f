#pragma once

#include "sparse_recovery/common.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sparse_recovery {

enum class EnsembleKind { gaussian, rademacher, explicit_matrix };

/// Accepts "gaussian", "rademacher" and "explicit"; anything else throws
/// std::invalid_argument.
EnsembleKind parse_ensemble_kind(std::string_view name);
std::string to_string(EnsembleKind kind);

/// Distribution of the nonzero magnitudes of a generated signal. Signs are
/// always uniform on {-1, +1}.
struct Amplitude {
  enum class Kind { unit, gaussian, uniform };

  Kind kind = Kind::unit;
  double low = 1.0;
  double high = 1.0;

  static Amplitude unit() { return {}; }
  static Amplitude gaussian() { return {Kind::gaussian, 0.0, 0.0}; }
  static Amplitude uniform(double low, double high);
};

/// "unit", "gaussian" or "uniform:<low>:<high>".
Amplitude parse_amplitude(std::string_view text);
std::string to_string(const Amplitude& amplitude);

/// A ground-truth sparse vector together with its support and a norm bound R
/// with ||values||_2 <= R.
class SparseSignal {
 public:
  /// Norm bound defaults to ||values||_2.
  explicit SparseSignal(Vector values);
  SparseSignal(Vector values, double norm_bound);

  Index dimension() const { return values_.size(); }
  Index sparsity() const { return static_cast<Index>(support_.size()); }
  const Vector& values() const { return values_; }
  const Support& support() const { return support_; }
  double norm_bound() const { return norm_bound_; }

 private:
  Vector values_;
  Support support_;
  double norm_bound_;
};

/// s nonzeros at uniformly random positions, magnitudes per `amplitude`,
/// R = ||x||_2. Pure function of its arguments.
SparseSignal generate_signal(Index d, Index s, const Amplitude& amplitude, std::uint64_t seed);

/// m x d matrix with i.i.d. N(0, 1/m) (gaussian) or +-1/sqrt(m) (rademacher)
/// entries. Bit-identical for identical arguments.
Matrix generate_matrix(Index m, Index d, EnsembleKind kind, std::uint64_t seed);

/// y = U x.
Vector measure(const Matrix& U, const Vector& x);

/// A measurement matrix with the measurements taken through it.
class MeasurementEnsemble {
 public:
  MeasurementEnsemble(Matrix U, Vector y, EnsembleKind kind,
                      std::optional<std::uint64_t> seed = std::nullopt);

  static MeasurementEnsemble generate(const SparseSignal& signal, Index m, EnsembleKind kind,
                                      std::uint64_t seed);
  static MeasurementEnsemble from_matrix(Matrix U, const SparseSignal& signal);

  const Matrix& matrix() const { return matrix_; }
  const Vector& measurements() const { return measurements_; }
  EnsembleKind kind() const { return kind_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }

  /// ||y - U x||_2 <= rel_tol * ||y||_2.
  bool consistent_with(const Vector& x, double rel_tol = 1e-12) const;

 private:
  Matrix matrix_;
  Vector measurements_;
  EnsembleKind kind_;
  std::optional<std::uint64_t> seed_;
};

/// Signal and ensemble drawn from one problem seed: the signal uses
/// derive_seed(seed, 0) and the matrix derive_seed(seed, 1).
struct ProblemInstance {
  SparseSignal signal;
  MeasurementEnsemble ensemble;
};

ProblemInstance generate_problem(Index d, Index s, Index m, EnsembleKind kind,
                                 const Amplitude& amplitude, std::uint64_t seed);

std::uint64_t signal_seed(std::uint64_t problem_seed);
std::uint64_t matrix_seed(std::uint64_t problem_seed);

}  // namespace sparse_recovery
