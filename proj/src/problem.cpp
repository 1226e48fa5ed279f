#include "sparse_recovery/problem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

namespace sparse_recovery {

EnsembleKind parse_ensemble_kind(std::string_view name) {
  if (name == "gaussian") return EnsembleKind::gaussian;
  if (name == "rademacher") return EnsembleKind::rademacher;
  if (name == "explicit") return EnsembleKind::explicit_matrix;
  throw std::invalid_argument("unknown ensemble kind '" + std::string(name) + "'");
}

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::gaussian: return "gaussian";
    case EnsembleKind::rademacher: return "rademacher";
    case EnsembleKind::explicit_matrix: return "explicit";
  }
  return "unknown";
}

Amplitude Amplitude::uniform(double low, double high) {
  if (!(low >= 0.0) || !(high >= low) || !(high > 0.0)) {
    throw std::invalid_argument("uniform amplitude needs 0 <= low <= high, high > 0");
  }
  return {Kind::uniform, low, high};
}

namespace {

double parse_number(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Amplitude parse_amplitude(std::string_view text) {
  if (text == "unit") return Amplitude::unit();
  if (text == "gaussian") return Amplitude::gaussian();
  constexpr std::string_view prefix = "uniform:";
  if (text.starts_with(prefix)) {
    const auto rest = text.substr(prefix.size());
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("expected uniform:<low>:<high>");
    }
    return Amplitude::uniform(parse_number(rest.substr(0, colon)),
                              parse_number(rest.substr(colon + 1)));
  }
  throw std::invalid_argument("unknown amplitude '" + std::string(text) + "'");
}

std::string to_string(const Amplitude& amplitude) {
  switch (amplitude.kind) {
    case Amplitude::Kind::unit: return "unit";
    case Amplitude::Kind::gaussian: return "gaussian";
    case Amplitude::Kind::uniform: {
      char buffer[64];
      auto* end = std::to_chars(buffer, buffer + sizeof buffer, amplitude.low).ptr;
      std::string out = "uniform:" + std::string(buffer, end) + ":";
      end = std::to_chars(buffer, buffer + sizeof buffer, amplitude.high).ptr;
      return out + std::string(buffer, end);
    }
  }
  return "unknown";
}

SparseSignal::SparseSignal(Vector values) : SparseSignal(values, values.norm()) {}

SparseSignal::SparseSignal(Vector values, double norm_bound)
    : values_(std::move(values)), support_(support_of(values_)), norm_bound_(norm_bound) {
  if (values_.size() < 1) throw std::invalid_argument("signal dimension must be positive");
  if (!values_.allFinite()) throw std::invalid_argument("signal has non-finite entries");
  if (!(norm_bound_ >= 0.0) || values_.norm() > norm_bound_) {
    throw std::invalid_argument("norm bound R must satisfy ||x||_2 <= R");
  }
}

SparseSignal generate_signal(Index d, Index s, const Amplitude& amplitude, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("dimension d must be >= 1");
  if (s < 0 || s > d) throw std::invalid_argument("sparsity s must satisfy 0 <= s <= d");

  std::mt19937_64 rng(seed);

  // Partial Fisher-Yates: the first s slots are a uniform s-subset.
  std::vector<Index> positions(static_cast<std::size_t>(d));
  std::iota(positions.begin(), positions.end(), Index{0});
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, d - 1);
    std::swap(positions[static_cast<std::size_t>(i)],
              positions[static_cast<std::size_t>(pick(rng))]);
  }

  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(amplitude.low, amplitude.high);

  Vector x = Vector::Zero(d);
  for (Index i = 0; i < s; ++i) {
    double magnitude = 0.0;
    while (magnitude == 0.0) {
      switch (amplitude.kind) {
        case Amplitude::Kind::unit: magnitude = 1.0; break;
        case Amplitude::Kind::gaussian: magnitude = std::abs(normal(rng)); break;
        case Amplitude::Kind::uniform:
          magnitude = amplitude.low == amplitude.high ? amplitude.low : uniform(rng);
          break;
      }
    }
    x[positions[static_cast<std::size_t>(i)]] = coin(rng) ? magnitude : -magnitude;
  }
  return SparseSignal(std::move(x));
}

Matrix generate_matrix(Index m, Index d, EnsembleKind kind, std::uint64_t seed) {
  if (m < 1 || d < 1) throw std::invalid_argument("matrix dimensions must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  std::mt19937_64 rng(seed);
  Matrix U(m, d);
  switch (kind) {
    case EnsembleKind::gaussian: {
      std::normal_distribution<double> normal(0.0, scale);
      for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < m; ++i) U(i, j) = normal(rng);
      break;
    }
    case EnsembleKind::rademacher: {
      std::bernoulli_distribution coin(0.5);
      for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < m; ++i) U(i, j) = coin(rng) ? scale : -scale;
      break;
    }
    case EnsembleKind::explicit_matrix:
      throw std::invalid_argument("explicit matrices are supplied, not generated");
  }
  return U;
}

Vector measure(const Matrix& U, const Vector& x) {
  if (U.cols() != x.size()) {
    throw std::invalid_argument("measure: matrix has " + std::to_string(U.cols()) +
                                " columns but signal has dimension " + std::to_string(x.size()));
  }
  return U * x;
}

MeasurementEnsemble::MeasurementEnsemble(Matrix U, Vector y, EnsembleKind kind,
                                         std::optional<std::uint64_t> seed)
    : matrix_(std::move(U)), measurements_(std::move(y)), kind_(kind), seed_(seed) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) {
    throw std::invalid_argument("measurement matrix must be non-empty");
  }
  if (measurements_.size() != matrix_.rows()) {
    throw std::invalid_argument("measurement count does not match matrix rows");
  }
  if (kind_ == EnsembleKind::explicit_matrix) seed_.reset();
}

MeasurementEnsemble MeasurementEnsemble::generate(const SparseSignal& signal, Index m,
                                                  EnsembleKind kind, std::uint64_t seed) {
  Matrix U = generate_matrix(m, signal.dimension(), kind, seed);
  Vector y = measure(U, signal.values());
  return MeasurementEnsemble(std::move(U), std::move(y), kind, seed);
}

MeasurementEnsemble MeasurementEnsemble::from_matrix(Matrix U, const SparseSignal& signal) {
  Vector y = measure(U, signal.values());
  return MeasurementEnsemble(std::move(U), std::move(y), EnsembleKind::explicit_matrix);
}

bool MeasurementEnsemble::consistent_with(const Vector& x, double rel_tol) const {
  if (x.size() != matrix_.cols()) return false;
  return (measurements_ - matrix_ * x).norm() <= rel_tol * measurements_.norm();
}

std::uint64_t signal_seed(std::uint64_t problem_seed) { return derive_seed(problem_seed, 0); }
std::uint64_t matrix_seed(std::uint64_t problem_seed) { return derive_seed(problem_seed, 1); }

ProblemInstance generate_problem(Index d, Index s, Index m, EnsembleKind kind,
                                 const Amplitude& amplitude, std::uint64_t seed) {
  SparseSignal signal = generate_signal(d, s, amplitude, signal_seed(seed));
  MeasurementEnsemble ensemble = MeasurementEnsemble::generate(signal, m, kind, matrix_seed(seed));
  return {std::move(signal), std::move(ensemble)};
}

}  // namespace sparse_recovery
