#include "sparse_recovery/problem.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace sparse_recovery;

TEST_CASE("generate_signal has exactly s nonzeros and R equal to its norm") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto signal = generate_signal(64, 3, Amplitude::unit(), seed);
    CHECK(signal.dimension() == 64);
    CHECK(signal.sparsity() == 3);
    CHECK(signal.support().size() == 3);
    for (Index i : signal.support()) CHECK(std::abs(signal.values()[i]) == 1.0);
    CHECK(signal.norm_bound() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    int nonzero = 0;
    for (Index i = 0; i < 64; ++i) nonzero += signal.values()[i] != 0.0;
    CHECK(nonzero == 3);
  }
}

TEST_CASE("generate_signal edge sizes") {
  const auto empty = generate_signal(10, 0, Amplitude::unit(), 1);
  CHECK(empty.values().isZero());
  CHECK(empty.support().empty());
  CHECK(empty.norm_bound() == 0.0);

  const auto dense = generate_signal(5, 5, Amplitude::unit(), 1);
  CHECK(dense.support() == Support{0, 1, 2, 3, 4});

  CHECK_THROWS_AS(generate_signal(4, 5, Amplitude::unit(), 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_signal(0, 0, Amplitude::unit(), 1), std::invalid_argument);
}

TEST_CASE("generate_signal support positions are spread over all coordinates") {
  std::set<Index> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto signal = generate_signal(16, 2, Amplitude::unit(), seed);
    seen.insert(signal.support().begin(), signal.support().end());
  }
  CHECK(seen.size() == 16);
}

TEST_CASE("amplitudes respect their ranges") {
  const auto uniform = generate_signal(50, 10, Amplitude::uniform(0.5, 2.0), 7);
  for (Index i : uniform.support()) {
    CHECK(std::abs(uniform.values()[i]) >= 0.5);
    CHECK(std::abs(uniform.values()[i]) <= 2.0);
  }
  const auto gauss = generate_signal(50, 10, Amplitude::gaussian(), 7);
  CHECK(gauss.sparsity() == 10);
  CHECK_THROWS_AS(Amplitude::uniform(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("amplitude and ensemble names round-trip") {
  for (const auto& text : {"unit", "gaussian", "uniform:0.5:2"}) {
    CHECK(to_string(parse_amplitude(text)) == text);
  }
  CHECK_THROWS(parse_amplitude("laplace"));
  CHECK_THROWS(parse_amplitude("uniform:1"));
  CHECK(parse_ensemble_kind("gaussian") == EnsembleKind::gaussian);
  CHECK(parse_ensemble_kind("rademacher") == EnsembleKind::rademacher);
  CHECK(parse_ensemble_kind("explicit") == EnsembleKind::explicit_matrix);
  CHECK(to_string(EnsembleKind::rademacher) == "rademacher");
  CHECK_THROWS_AS(parse_ensemble_kind("bernoulli"), std::invalid_argument);
}

TEST_CASE("SparseSignal rejects a norm bound below the norm") {
  Vector x = Vector::Zero(4);
  x[1] = 3.0;
  x[3] = -4.0;
  CHECK_NOTHROW(SparseSignal(x, 5.0));
  CHECK_NOTHROW(SparseSignal(x, 7.0));
  CHECK_THROWS_AS(SparseSignal(x, 4.9), std::invalid_argument);
  CHECK_THROWS_AS(SparseSignal(x, -1.0), std::invalid_argument);
  CHECK(SparseSignal(x).support() == Support{1, 3});
}

TEST_CASE("generate_matrix entries follow the ensemble") {
  const Index m = 40, d = 64;
  const Matrix R = generate_matrix(m, d, EnsembleKind::rademacher, 3);
  CHECK(R.rows() == m);
  CHECK(R.cols() == d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < d; ++j) CHECK(std::abs(R(i, j)) == doctest::Approx(1.0 / std::sqrt(40.0)));
  // Columns are unit norm for Rademacher.
  for (Index j = 0; j < d; ++j) CHECK(R.col(j).norm() == doctest::Approx(1.0).epsilon(1e-14));

  const Matrix G = generate_matrix(400, 200, EnsembleKind::gaussian, 3);
  const double mean = G.mean();
  const double var = (G.array() - mean).square().mean();
  CHECK(std::abs(mean) < 1e-3);
  CHECK(var == doctest::Approx(1.0 / 400.0).epsilon(0.02));

  CHECK_THROWS_AS(generate_matrix(4, 4, EnsembleKind::explicit_matrix, 1), std::invalid_argument);
}

TEST_CASE("generation is bit-identical per seed and differs across seeds") {
  const Matrix a = generate_matrix(20, 30, EnsembleKind::gaussian, 99);
  const Matrix b = generate_matrix(20, 30, EnsembleKind::gaussian, 99);
  const Matrix c = generate_matrix(20, 30, EnsembleKind::gaussian, 100);
  CHECK(a == b);
  CHECK(a != c);
  const auto p = generate_problem(64, 3, 40, EnsembleKind::gaussian, Amplitude::unit(), 11);
  const auto q = generate_problem(64, 3, 40, EnsembleKind::gaussian, Amplitude::unit(), 11);
  CHECK(p.signal.values() == q.signal.values());
  CHECK(p.ensemble.matrix() == q.ensemble.matrix());
  CHECK(p.ensemble.measurements() == q.ensemble.measurements());
  CHECK(p.ensemble.matrix() == generate_matrix(40, 64, EnsembleKind::gaussian, matrix_seed(11)));
  CHECK(signal_seed(11) != matrix_seed(11));
}

TEST_CASE("measure is linear and checks dimensions") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const Matrix U = generate_matrix(12, 20, EnsembleKind::gaussian, 1);
  Vector a(20), b(20);
  for (Index i = 0; i < 20; ++i) {
    a[i] = normal(rng);
    b[i] = normal(rng);
  }
  const double alpha = 0.75, beta = -2.5;
  const Vector lhs = measure(U, alpha * a + beta * b);
  const Vector rhs = alpha * measure(U, a) + beta * measure(U, b);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  // Independent loop for one product.
  const Vector y = measure(U, a);
  for (Index i = 0; i < 12; ++i) {
    double sum = 0.0;
    for (Index j = 0; j < 20; ++j) sum += U(i, j) * a[j];
    CHECK(y[i] == doctest::Approx(sum).epsilon(1e-13));
  }
  CHECK_THROWS_AS(measure(U, Vector::Zero(19)), std::invalid_argument);
}

TEST_CASE("ensembles are consistent with their signal") {
  const auto problem = generate_problem(32, 4, 20, EnsembleKind::rademacher, Amplitude::gaussian(), 8);
  CHECK(problem.ensemble.consistent_with(problem.signal.values()));
  CHECK(problem.ensemble.rows() == 20);
  CHECK(problem.ensemble.cols() == 32);
  CHECK(problem.ensemble.seed().has_value());
  Vector wrong = problem.signal.values();
  wrong[problem.signal.support().front()] += 0.5;
  CHECK_FALSE(problem.ensemble.consistent_with(wrong));

  const auto identity = MeasurementEnsemble::from_matrix(Matrix::Identity(32, 32), problem.signal);
  CHECK(identity.measurements() == problem.signal.values());
  CHECK(identity.kind() == EnsembleKind::explicit_matrix);
  CHECK_FALSE(identity.seed().has_value());
}
