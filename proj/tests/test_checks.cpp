#include "sparse_recovery/checks.hpp"
#include "sparse_recovery/problem.hpp"
#include "sparse_recovery/solver.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

using namespace sparse_recovery;

namespace {

IterateTrace run(const ProblemInstance& problem, double gamma, int T, double plugin = 3.0) {
  RecoveryConfig config;
  config.gamma = gamma;
  config.plugin_factor = plugin;
  config.s = problem.signal.sparsity();
  config.R = problem.signal.norm_bound();
  config.iterations = T;
  return recover(problem.ensemble, config, problem.signal.values());
}

std::size_t set_union_size(const Vector& a, const Vector& b) {
  std::set<Index> all;
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0 || b[i] != 0.0) all.insert(i);
  }
  return all.size();
}

}  // namespace

TEST_CASE("off-support count is zero at the truth") {
  const auto problem = generate_problem(20, 2, 16, EnsembleKind::gaussian, Amplitude::unit(), 4);
  const auto rip = exact_rip_constants(problem.ensemble.matrix(), 2);
  const auto count = check_offsupport_count(problem.signal.values(), problem.signal.values(),
                                            problem.ensemble.matrix(), 0.2, 2, rip);
  CHECK(count.count == 0);
  CHECK(count.threshold == 0.0);
  CHECK(count.ok);
}

TEST_CASE("off-support count with identity measurements and gamma 0") {
  const auto signal = generate_signal(12, 3, Amplitude::gaussian(), 1);
  const RipConstants zero{0.0, 0.0, 0.0};
  // v = x_t - (x_t - x_*) = x_*, which vanishes off the support.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Vector x_t = generate_signal(12, 5, Amplitude::gaussian(), seed + 50).values();
    const auto count = check_offsupport_count(x_t, signal.values(), Matrix::Identity(12, 12), 0.0, 3, zero);
    CHECK(count.count == 0);
  }
}

TEST_CASE("off-support count matches a sort-based recount") {
  const auto problem = generate_problem(20, 2, 16, EnsembleKind::gaussian, Amplitude::unit(), 4);
  const Matrix& U = problem.ensemble.matrix();
  const Vector& truth = problem.signal.values();
  const auto rip = exact_rip_constants(U, 2);
  const auto trace = run(problem, 0.2, 30);
  const double gamma = 0.2;
  for (const auto& record : trace.iterates) {
    const auto count = check_offsupport_count(record.x, truth, U, gamma, 2, rip);
    // Independent path: build v entry by entry, sort the off-support
    // magnitudes descending and find how many clear the threshold.
    const Vector e = record.x - truth;
    std::vector<double> magnitudes;
    for (Index i = 0; i < 20; ++i) {
      if (truth[i] != 0.0) continue;
      double gram = 0.0;
      for (Index k = 0; k < 20; ++k) gram += U.col(i).dot(U.col(k)) * e[k];
      magnitudes.push_back(std::abs((1.0 + gamma) * record.x[i] - gram));
    }
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
    const double threshold = (rip.theta_ss + rip.delta_s + gamma) / std::sqrt(2.0) * e.norm();
    std::size_t expected = 0;
    while (expected < magnitudes.size() && magnitudes[expected] > threshold * (1 + kVerdictSlack)) ++expected;
    CHECK(count.count == expected);
    CHECK(count.threshold == doctest::Approx(threshold).epsilon(1e-14));
    CHECK(count.threshold_stated_constant ==
          doctest::Approx((2 * rip.theta_ss + gamma) / std::sqrt(2.0) * e.norm()).epsilon(1e-14));
  }
}

TEST_CASE("off-support count requires RIP constants") {
  const Vector x = Vector::Zero(4);
  CHECK_THROWS_AS(check_offsupport_count(x, x, Matrix::Identity(4, 4), 0.1, 1, std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("support evolution: empty start and subset traces") {
  const auto signal = generate_signal(15, 3, Amplitude::unit(), 2);
  std::vector<IterateRecord> iterates;
  iterates.push_back({1, Vector::Zero(15), {}, 0.1, {}, {}});
  Vector partial = signal.values();
  partial[signal.support().front()] = 0.0;
  iterates.push_back({2, 0.5 * partial, {}, 0.1, {}, {}});
  iterates.push_back({3, signal.values(), {}, std::nullopt, {}, {}});
  const auto steps = check_support_evolution(iterates, signal.values(), 3, 0.2, std::nullopt);
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].union_size == 3);
  CHECK(steps[0].support_size == 0);
  for (const auto& step : steps) {
    CHECK(step.support_bound_ok);
    CHECK(step.union_size == 3);
  }
  CHECK(steps[0].union3_ok == std::optional<bool>{true});
  CHECK_FALSE(steps[2].union3_size.has_value());
  CHECK_FALSE(steps[0].corollary_ok.has_value());
}

TEST_CASE("support evolution flags a support blow-up") {
  const auto signal = generate_signal(10, 1, Amplitude::unit(), 3);
  std::vector<IterateRecord> iterates;
  iterates.push_back({1, Vector::Zero(10), {}, 0.0, {}, {}});
  iterates.push_back({2, Vector::Ones(10), {}, std::nullopt, {}, {}});
  const RipConstants rip{0.0, 0.0, 0.0};
  const auto steps = check_support_evolution(iterates, signal.values(), 1, 0.0, rip);
  CHECK(steps[0].support_bound_ok);
  CHECK_FALSE(steps[1].support_bound_ok);
  CHECK(steps[0].union3_size == std::optional<std::size_t>{10});
  CHECK(steps[0].union3_ok == std::optional<bool>{false});
  // All constants zero: threshold 0, so tau = 0 is admissible and the blown
  // bound at t = 2 breaks the implication.
  CHECK(steps[0].tau_admissible == std::optional<bool>{true});
  CHECK(steps[0].corollary_ok == std::optional<bool>{false});
}

TEST_CASE("union sizes on a full run agree with a set-union recount") {
  const auto problem = generate_problem(64, 3, 40, EnsembleKind::gaussian, Amplitude::unit(), 11);
  const auto trace = run(problem, 0.15, 60, 5.0);
  const Vector& truth = problem.signal.values();
  const auto steps = check_support_evolution(trace.iterates, truth, 3, 0.15, std::nullopt);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    CHECK(steps[i].union_size == set_union_size(trace.iterates[i].x, truth));
    if (i + 1 < steps.size()) {
      std::set<Index> all;
      for (Index k = 0; k < 64; ++k) {
        if (truth[k] != 0.0 || trace.iterates[i].x[k] != 0.0 || trace.iterates[i + 1].x[k] != 0.0) {
          all.insert(k);
        }
      }
      CHECK(*steps[i].union3_size == all.size());
    }
  }
}

TEST_CASE("decay envelope base case and degenerate rate") {
  CHECK(decay_envelope(1, 0.1, 2.5) == 2.5);
  for (int t = 1; t < 100; ++t) CHECK(decay_envelope(t, 0.25, 1.7) == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(decay_envelope(3, 0.0, 1.0) == 0.0);
  CHECK(decay_envelope(4, 0.3, 0.0) == 0.0);
  CHECK_THROWS_AS(decay_envelope(0, 0.1, 1.0), std::invalid_argument);
  // Underflow-free far out.
  CHECK(decay_envelope(5000, 0.01, 1.0) >= 0.0);
  CHECK(std::isfinite(std::log(decay_envelope(500, 0.1, 1.0))));
}

TEST_CASE("log-domain envelope matches direct powering") {
  const auto problem = generate_problem(64, 3, 40, EnsembleKind::gaussian, Amplitude::unit(), 5);
  const double R = problem.signal.norm_bound();
  const auto trace = run(problem, 0.1, 20);
  const auto check = check_decay(trace.iterates, problem.signal.values(), 0.1, R, 3);
  CHECK(check.applicable);
  for (const auto& step : check.steps) {
    double direct = R;
    for (int k = 1; k < step.t; ++k) direct *= std::sqrt(0.4);
    CHECK(step.envelope == doctest::Approx(direct).epsilon(1e-13));
    CHECK(step.decay2_ok == (step.err2 <= direct * (1 + kVerdictSlack)));
  }
  CHECK_FALSE(check_decay(trace.iterates, problem.signal.values(), 0.3, R, 3).applicable);
}

TEST_CASE("decay base case holds with R = ||x_*||") {
  const auto problem = generate_problem(30, 3, 20, EnsembleKind::gaussian, Amplitude::gaussian(), 1);
  const auto trace = run(problem, 0.2, 5);
  const auto check = check_decay(trace.iterates, problem.signal.values(), 0.2, problem.signal.norm_bound(), 3);
  CHECK(check.steps[0].err2 == doctest::Approx(problem.signal.norm_bound()));
  CHECK(check.steps[0].decay2_ok);
}

TEST_CASE("identity, gamma 0 and a small tau: every verdict holds") {
  const auto signal = generate_signal(16, 3, Amplitude::unit(), 6);
  const auto ensemble = MeasurementEnsemble::from_matrix(Matrix::Identity(16, 16), signal);
  RecoveryConfig config;
  config.gamma = 0.0;
  config.tau_mode = TauMode::constant;
  config.tau_constant = 0.0;
  config.s = 3;
  config.R = signal.norm_bound();
  config.iterations = 4;
  const auto trace = recover(ensemble, config, signal.values());
  CHECK(trace.iterates[1].x == signal.values());
  const RipConstants zero{0.0, 0.0, 0.0};
  const auto report = verify_trace(trace.iterates, signal.values(), ensemble.matrix(), 0.0, 3,
                                   signal.norm_bound(), zero);
  CHECK(report.passed());
  CHECK(report.all_measured_pass());
  CHECK(report.rip_hypothesis == std::optional<bool>{true});
  // tau = 0 equals the schedule (leading constant 0), so every step applies.
  for (const auto& it : report.iterations) CHECK(it.applicable);
}

TEST_CASE("verdicts only use the iterates") {
  const auto problem = generate_problem(20, 2, 16, EnsembleKind::gaussian, Amplitude::unit(), 4);
  auto trace = run(problem, 0.2, 25);
  const auto rip = exact_rip_constants(problem.ensemble.matrix(), 2);
  const auto a = verify_trace(trace.iterates, problem.signal.values(), problem.ensemble.matrix(), 0.2,
                              2, problem.signal.norm_bound(), rip);
  for (auto& record : trace.iterates) {
    record.err2 = 1e9;
    record.err1.reset();
    record.support.clear();
  }
  const auto b = verify_trace(trace.iterates, problem.signal.values(), problem.ensemble.matrix(), 0.2,
                              2, problem.signal.norm_bound(), rip);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("l1 implication holds on every trace") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto problem = generate_problem(40, 4, 20, EnsembleKind::rademacher, Amplitude::gaussian(), seed);
    const auto trace = run(problem, 0.25, 30);
    const auto report = verify_trace(trace.iterates, problem.signal.values(), problem.ensemble.matrix(),
                                     0.25, 4, problem.signal.norm_bound(), std::nullopt);
    for (const auto& it : report.iterations) CHECK(it.l1_implication_ok);
    // Without RIP constants the guarantee is never in force.
    for (const auto& it : report.iterations) CHECK_FALSE(it.applicable);
    CHECK(report.passed());
  }
}

TEST_CASE("gamma above 1/4 marks the guarantee inapplicable, not failed") {
  const auto problem = generate_problem(30, 3, 12, EnsembleKind::gaussian, Amplitude::unit(), 2);
  const auto trace = run(problem, 0.4, 20);
  const RipConstants tiny{0.0, 0.0, 0.0};
  const auto report = verify_trace(trace.iterates, problem.signal.values(), problem.ensemble.matrix(),
                                   0.4, 3, problem.signal.norm_bound(), tiny);
  CHECK_FALSE(report.gamma_admissible);
  for (const auto& it : report.iterations) CHECK_FALSE(it.applicable);
  for (const auto& failure : report.failures) {
    CHECK(failure.find("2s") == std::string::npos);
    CHECK(failure.find("l2 error") == std::string::npos);
  }
}

TEST_CASE("a fabricated trace that violates the decay bound fails when applicable") {
  const auto signal = generate_signal(8, 1, Amplitude::unit(), 1);
  const Matrix U = Matrix::Identity(8, 8);
  const RipConstants zero{0.0, 0.0, 0.0};
  const double gamma = 0.0625;  // 4 gamma = 1/4, so Delta_t = R / 2^(t-1)
  const double R = 1.0;
  const double tau1 = gamma / 1.0 * R;
  std::vector<IterateRecord> iterates;
  iterates.push_back({1, Vector::Zero(8), {}, tau1, {}, {}});
  iterates.push_back({2, 0.1 * signal.values(), {}, std::nullopt, {}, {}});  // err2 = 0.9 > 0.5
  const auto report = verify_trace(iterates, signal.values(), U, gamma, 1, R, zero);
  CHECK(report.iterations[1].applicable);
  CHECK_FALSE(report.iterations[1].decay2_ok);
  CHECK_FALSE(report.passed());
  CHECK(verdict_token(report.iterations[1]).find("decay2=0") != std::string::npos);
}

TEST_CASE("verdict token and JSON shape") {
  IterationCheck it;
  it.union3_ok = true;
  it.recurrence_ok = false;
  CHECK(verdict_token(it) ==
        "support=1;union3=1;decay2=1;decay1=1;decay1_2s=1;l1=1;recurrence=0;applicable=0");
  const auto signal = generate_signal(6, 1, Amplitude::unit(), 1);
  std::vector<IterateRecord> iterates{{1, Vector::Zero(6), {}, std::nullopt, {}, {}}};
  const auto j = to_json(verify_trace(iterates, signal.values(), Matrix::Identity(6, 6), 0.1, 1, 1.0, std::nullopt));
  CHECK(j.at("iterations").size() == 1);
  CHECK(j.at("rip").is_null());
  CHECK(j.at("passed") == true);
}

TEST_CASE("verify_trace argument errors") {
  const Vector truth = Vector::Zero(5);
  std::vector<IterateRecord> none;
  CHECK_THROWS_AS(verify_trace(none, truth, Matrix::Identity(5, 5), 0.1, 1, 1.0, std::nullopt),
                  std::invalid_argument);
  std::vector<IterateRecord> wrong{{1, Vector::Zero(4), {}, std::nullopt, {}, {}}};
  CHECK_THROWS_AS(verify_trace(wrong, truth, Matrix::Identity(5, 5), 0.1, 1, 1.0, std::nullopt),
                  std::invalid_argument);
}
