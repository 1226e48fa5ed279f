#include "sparse_recovery/checks.hpp"

#include <cmath>
#include <limits>

namespace sparse_recovery {

namespace {

bool at_most(double lhs, double rhs) { return lhs <= rhs * (1.0 + kVerdictSlack); }
bool at_least(double lhs, double rhs) { return lhs >= rhs * (1.0 - kVerdictSlack); }

double leading_constant(const RipConstants& rip, double gamma) {
  return rip.theta_ss + rip.delta_s + gamma;
}

void require_rip(const std::optional<RipConstants>& rip) {
  if (!rip) {
    throw std::invalid_argument(
        "RIP constants are required for this check: supply delta_s and theta_ss or run the exact "
        "oracle");
  }
}

}  // namespace

OffsupportCount check_offsupport_count(const Vector& x_t, const Vector& truth, const Matrix& U,
                                       double gamma, Index s,
                                       const std::optional<RipConstants>& rip) {
  require_rip(rip);
  if (s < 1) throw std::invalid_argument("check_offsupport_count: s must be >= 1");
  if (x_t.size() != truth.size() || U.cols() != x_t.size()) {
    throw std::invalid_argument("check_offsupport_count: dimension mismatch");
  }
  const Vector diff = x_t - truth;
  const Vector v = (1.0 + gamma) * x_t - U.transpose() * (U * diff);
  const double err2 = diff.norm();
  const double root_s = std::sqrt(static_cast<double>(s));

  OffsupportCount result;
  result.threshold = leading_constant(*rip, gamma) / root_s * err2;
  result.threshold_stated_constant = (2.0 * rip->theta_ss + gamma) / root_s * err2;
  const double cut = result.threshold * (1.0 + kVerdictSlack);
  const double cut_stated = result.threshold_stated_constant * (1.0 + kVerdictSlack);
  for (Index i = 0; i < v.size(); ++i) {
    if (truth[i] != 0.0) continue;
    const double magnitude = std::abs(v[i]);
    if (magnitude > cut) ++result.count;
    if (magnitude > cut_stated) ++result.count_stated_constant;
  }
  result.ok = result.count <= static_cast<std::size_t>(s);
  return result;
}

std::vector<SupportStep> check_support_evolution(const std::vector<IterateRecord>& iterates,
                                                 const Vector& truth, Index s, double gamma,
                                                 const std::optional<RipConstants>& rip) {
  const Support truth_support = support_of(truth);
  const auto two_s = static_cast<std::size_t>(2 * s);
  const auto three_s = static_cast<std::size_t>(3 * s);

  std::vector<Support> supports;
  supports.reserve(iterates.size());
  for (const auto& record : iterates) supports.push_back(support_of(record.x));

  std::vector<SupportStep> steps(iterates.size());
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    auto& step = steps[i];
    step.t = iterates[i].t;
    step.support_size = supports[i].size();
    step.union_size = union_size(supports[i], truth_support);
    step.support_bound_ok = step.union_size <= two_s;
  }

  for (std::size_t i = 0; i + 1 < iterates.size(); ++i) {
    auto& step = steps[i];
    step.union3_size = union_size(truth_support, supports[i], supports[i + 1]);
    step.union3_ok = *step.union3_size <= three_s;
    if (rip && iterates[i].tau) {
      const double err2 = (iterates[i].x - truth).norm();
      step.tau_threshold =
          leading_constant(*rip, gamma) / std::sqrt(static_cast<double>(s)) * err2;
      step.tau_admissible = at_least(*iterates[i].tau, *step.tau_threshold);
      const bool hypothesis = step.support_bound_ok && *step.tau_admissible;
      step.corollary_ok = !hypothesis || (steps[i + 1].support_bound_ok && *step.union3_ok);
    }
  }
  return steps;
}

double decay_envelope(int t, double gamma, double R) {
  if (t < 1) throw std::invalid_argument("decay_envelope: t must be >= 1");
  if (R == 0.0) return 0.0;
  if (t == 1) return R;
  if (gamma == 0.0) return 0.0;
  return std::exp(0.5 * (t - 1) * std::log(4.0 * gamma) + std::log(R));
}

DecayCheck check_decay(const std::vector<IterateRecord>& iterates, const Vector& truth,
                       double gamma, double R, Index s) {
  DecayCheck check;
  check.applicable = gamma <= 0.25;
  check.steps.resize(iterates.size());
  const double root_s = std::sqrt(static_cast<double>(s));
  const double root_2s = std::sqrt(2.0 * static_cast<double>(s));
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    auto& step = check.steps[i];
    const Vector diff = iterates[i].x - truth;
    step.t = iterates[i].t;
    step.err2 = diff.norm();
    step.err1 = diff.lpNorm<1>();
    step.envelope = decay_envelope(step.t, gamma, R);
    step.decay2_ok = at_most(step.err2, step.envelope);
    step.decay1_ok = at_most(step.err1, root_s * step.envelope);
    step.decay1_2s_ok = at_most(step.err1, root_2s * step.envelope);
  }
  for (std::size_t i = 0; i + 1 < iterates.size(); ++i) {
    const auto& now = check.steps[i];
    const double next2 = check.steps[i + 1].err2 * check.steps[i + 1].err2;
    const double base = std::max(now.err2 * now.err2, now.envelope * now.envelope);
    check.steps[i].recurrence_ok = at_most(next2, 4.0 * gamma * base);
  }
  return check;
}

bool CheckReport::support_bound_everywhere() const {
  for (const auto& it : iterations) {
    if (!it.support_bound_ok) return false;
  }
  return true;
}

bool CheckReport::all_measured_pass() const {
  for (const auto& it : iterations) {
    if (!it.support_bound_ok || !it.decay2_ok || !it.decay1_2s_ok || !it.l1_implication_ok) {
      return false;
    }
    if (it.union3_ok && !*it.union3_ok) return false;
    if (it.recurrence_ok && !*it.recurrence_ok) return false;
    if (it.offsupport && !it.offsupport->ok) return false;
    if (it.corollary_ok && !*it.corollary_ok) return false;
  }
  return true;
}

CheckReport verify_trace(const std::vector<IterateRecord>& iterates, const Vector& truth,
                         const Matrix& U, double gamma, Index s, double R,
                         const std::optional<RipConstants>& rip) {
  if (iterates.empty()) throw std::invalid_argument("verify_trace: empty trace");
  if (s < 1) throw std::invalid_argument("verify_trace: s must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("verify_trace: gamma must be >= 0");
  for (const auto& record : iterates) {
    if (record.x.size() != truth.size()) {
      throw std::invalid_argument("verify_trace: iterate dimension differs from truth");
    }
  }
  if (U.cols() != truth.size()) throw std::invalid_argument("verify_trace: matrix width mismatch");

  CheckReport report;
  report.gamma = gamma;
  report.s = s;
  report.R = R;
  report.truth_norm = truth.norm();
  report.rip = rip;
  report.gamma_admissible = gamma <= 0.25;
  if (rip && rip->delta_3s) report.rip_hypothesis = at_least(gamma, rip->theorem_gamma());

  const bool hypotheses = report.gamma_admissible && report.rip_hypothesis.value_or(false) &&
                          at_most(report.truth_norm, R);

  const auto support = check_support_evolution(iterates, truth, s, gamma, rip);
  const auto decay = check_decay(iterates, truth, gamma, R, s);
  const double root_s = std::sqrt(static_cast<double>(s));

  auto fail = [&](int t, const std::string& what) {
    report.failures.push_back("t=" + std::to_string(t) + ": " + what);
  };

  bool applicable = hypotheses;
  report.iterations.resize(iterates.size());
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    auto& it = report.iterations[i];
    const auto& sup = support[i];
    const auto& dec = decay.steps[i];
    it.t = iterates[i].t;
    it.tau = iterates[i].tau;
    it.support_size = sup.support_size;
    it.union_size = sup.union_size;
    it.support_bound_ok = sup.support_bound_ok;
    it.union3_size = sup.union3_size;
    it.union3_ok = sup.union3_ok;
    it.tau_threshold = sup.tau_threshold;
    it.tau_admissible = sup.tau_admissible;
    it.corollary_ok = sup.corollary_ok;
    it.err2 = dec.err2;
    it.err1 = dec.err1;
    it.envelope = dec.envelope;
    it.decay2_ok = dec.decay2_ok;
    it.decay1_ok = dec.decay1_ok;
    it.decay1_2s_ok = dec.decay1_2s_ok;
    it.recurrence_ok = dec.recurrence_ok;
    it.l1_implication_ok =
        at_most(dec.err1, std::sqrt(static_cast<double>(sup.union_size)) * dec.err2);
    if (rip && sup.support_bound_ok) {
      it.offsupport = check_offsupport_count(iterates[i].x, truth, U, gamma, s, rip);
    }
    it.applicable = applicable;

    // Does this step's tau match the schedule the guarantee assumes?
    bool step_applicable = false;
    if (applicable && it.tau) {
      const double scheduled = leading_constant(*rip, gamma) / root_s * dec.envelope;
      step_applicable = std::abs(*it.tau - scheduled) <= kVerdictSlack * scheduled;
    }

    if (!it.l1_implication_ok) fail(it.t, "l1 norm exceeds sqrt(|S_t u S_*|) times l2 norm");
    if (it.corollary_ok && !*it.corollary_ok) {
      fail(it.t, "support hypotheses held but the next support bound failed");
    }
    if (it.offsupport && !it.offsupport->ok) {
      fail(it.t, "off-support count " + std::to_string(it.offsupport->count) + " exceeds s");
    }
    if (it.applicable) {
      if (!it.support_bound_ok) {
        fail(it.t, "|S_t u S_*| = " + std::to_string(it.union_size) + " exceeds 2s");
      }
      if (!it.decay2_ok) fail(it.t, "l2 error above (4 gamma)^((t-1)/2) R");
      if (!it.decay1_2s_ok) fail(it.t, "l1 error above sqrt(2s) (4 gamma)^((t-1)/2) R");
    }
    if (step_applicable) {
      if (it.union3_ok && !*it.union3_ok) fail(it.t, "triple support union exceeds 3s");
      if (it.recurrence_ok && !*it.recurrence_ok) fail(it.t, "one-step decay recurrence failed");
    }
    applicable = step_applicable;
  }
  return report;
}

namespace {

template <class T>
nlohmann::json optional_json(const std::optional<T>& value) {
  return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json j;
  j["gamma"] = report.gamma;
  j["s"] = report.s;
  j["R"] = report.R;
  j["truth_norm"] = report.truth_norm;
  if (report.rip) {
    j["rip"] = {{"delta_s", report.rip->delta_s},
                {"theta_ss", report.rip->theta_ss},
                {"delta_3s", optional_json(report.rip->delta_3s)}};
  } else {
    j["rip"] = nullptr;
  }
  j["gamma_admissible"] = report.gamma_admissible;
  j["rip_hypothesis"] = optional_json(report.rip_hypothesis);
  j["passed"] = report.passed();
  j["failures"] = report.failures;

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& it : report.iterations) {
    nlohmann::json row;
    row["t"] = it.t;
    row["tau"] = optional_json(it.tau);
    row["support_size"] = it.support_size;
    row["support_union_size"] = it.union_size;
    row["support_bound_ok"] = it.support_bound_ok;
    row["union3_size"] = optional_json(it.union3_size);
    row["union3_ok"] = optional_json(it.union3_ok);
    if (it.offsupport) {
      row["offsupport"] = {{"count", it.offsupport->count},
                           {"threshold", it.offsupport->threshold},
                           {"ok", it.offsupport->ok},
                           {"count_stated_constant", it.offsupport->count_stated_constant},
                           {"threshold_stated_constant", it.offsupport->threshold_stated_constant}};
    } else {
      row["offsupport"] = nullptr;
    }
    row["tau_threshold"] = optional_json(it.tau_threshold);
    row["tau_admissible"] = optional_json(it.tau_admissible);
    row["corollary_ok"] = optional_json(it.corollary_ok);
    row["err2"] = it.err2;
    row["err1"] = it.err1;
    row["err2_over_R"] = report.R > 0.0 ? nlohmann::json(it.err2 / report.R) : nlohmann::json(nullptr);
    row["err2_over_truth"] = report.truth_norm > 0.0 ? nlohmann::json(it.err2 / report.truth_norm)
                                                     : nlohmann::json(nullptr);
    row["envelope"] = it.envelope;
    row["decay2_ok"] = it.decay2_ok;
    row["decay1_ok"] = it.decay1_ok;
    row["decay1_2s_ok"] = it.decay1_2s_ok;
    row["l1_implication_ok"] = it.l1_implication_ok;
    row["recurrence_ok"] = optional_json(it.recurrence_ok);
    row["applicable"] = it.applicable;
    rows.push_back(std::move(row));
  }
  j["iterations"] = std::move(rows);
  return j;
}

std::string verdict_token(const IterationCheck& check) {
  std::string out;
  auto add = [&out](const char* name, bool value) {
    if (!out.empty()) out += ';';
    out += name;
    out += value ? "=1" : "=0";
  };
  add("support", check.support_bound_ok);
  if (check.union3_ok) add("union3", *check.union3_ok);
  if (check.offsupport) add("offsupport", check.offsupport->ok);
  if (check.corollary_ok) add("corollary", *check.corollary_ok);
  add("decay2", check.decay2_ok);
  add("decay1", check.decay1_ok);
  add("decay1_2s", check.decay1_2s_ok);
  add("l1", check.l1_implication_ok);
  if (check.recurrence_ok) add("recurrence", *check.recurrence_ok);
  add("applicable", check.applicable);
  return out;
}

}  // namespace sparse_recovery
