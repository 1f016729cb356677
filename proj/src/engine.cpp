#include "betting/engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "betting/error.hpp"

namespace betting {

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << name << " = " << v << " outside [0,1]";
    throw DataError(msg.str());
  }
}

}  // namespace

Scenario Scenario::one_sided(double mu0) {
  if (!(mu0 >= 0.0 && mu0 <= 1.0)) {
    throw ConfigError("mu0 must lie in [0,1], got " + std::to_string(mu0));
  }
  return {ScenarioKind::OneSided, mu0};
}

std::string to_string(const Scenario& s) {
  return s.one_sided() ? "one-sided" : "diff-means";
}

Scenario parse_scenario(std::string_view name, std::optional<double> mu0) {
  if (name == "diff-means" || name == "difference-in-means") {
    return Scenario::difference_in_means();
  }
  if (name == "one-sided") {
    if (!mu0) throw ConfigError("one-sided scenario requires mu0");
    return Scenario::one_sided(*mu0);
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

DecisionSpace barrier_space(const Scenario& s) {
  return s.one_sided() ? DecisionSpace{0.0, 1.0, true} : DecisionSpace{-1.0, 1.0, true};
}

DecisionSpace ons_space(const Scenario& s) {
  return s.one_sided() ? DecisionSpace{0.0, 0.5, false} : DecisionSpace{-0.5, 0.5, false};
}

DecisionSpace portfolio_space(const Scenario& s) {
  return s.one_sided() ? DecisionSpace{0.0, 1.0, false} : DecisionSpace{-1.0, 1.0, false};
}

Payoff payoff_diff_means(double x, double y) {
  check_unit(x, "x");
  check_unit(y, "y");
  return {x - y};
}

Payoff payoff_one_sided(double mu0, double x) {
  check_unit(mu0, "mu0");
  check_unit(x, "x");
  return {mu0 - x};
}

Observation make_observation(const Scenario& s, double x, double y) {
  if (s.one_sided()) return {x, 0.0, payoff_one_sided(s.mu0, x)};
  return {x, y, payoff_diff_means(x, y)};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Running: return "RUNNING";
    case Verdict::Rejected: return "REJECTED";
    case Verdict::NotRejected: return "NOT_REJECTED";
  }
  return "?";
}

WealthState wealth_step(const WealthState& state, double theta, Payoff g) {
  if (state.stopped) throw ConfigError("wealth_step on a stopped test");
  const double factor = 1.0 - theta * g.g;
  if (!(factor >= kMinWealthFactor)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "wealth factor 1 - theta*g = " << factor << " at theta = " << theta
        << ", g = " << g.g;
    throw NumericalError(msg.str());
  }
  WealthState next = state;
  next.wealth = state.wealth * factor;
  next.logWealth = state.logWealth + std::log(factor);
  next.round = state.round + 1;
  return next;
}

bool ville_reject(double wealth, double alpha) { return wealth >= 1.0 / alpha; }

bool randomized_budget_verdict_with(double finalWealth, double alpha, double nu) {
  return finalWealth >= nu / alpha;
}

bool randomized_budget_verdict(double finalWealth, double alpha, Rng& rng) {
  return randomized_budget_verdict_with(finalWealth, alpha, rng.uniform());
}

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("eta must be positive, got " + std::to_string(eta));
  }
  if (budget && *budget == 0) throw ConfigError("budget must be positive");
}

StoppingRule::StoppingRule(const TestConfig& config) : config_(config) {}

bool StoppingRule::record(double wealth, double logWealth, double theta) {
  ++result_.rounds;
  result_.finalWealth = wealth;
  result_.finalLogWealth = logWealth;
  if (config_.recordTrajectory) {
    result_.wealthTrajectory.push_back(wealth);
    result_.logWealthTrajectory.push_back(logWealth);
    result_.thetaTrajectory.push_back(theta);
  }
  if (ville_reject(wealth, config_.alpha)) {
    result_.verdict = Verdict::Rejected;
    result_.rejectionTime = result_.rounds;
    return true;
  }
  return false;
}

bool StoppingRule::budget_reached() const {
  return config_.budget && result_.rounds >= *config_.budget;
}

TestResult StoppingRule::finish(bool streamExhausted) {
  result_.streamExhausted = streamExhausted;
  if (result_.verdict == Verdict::Rejected) return std::move(result_);
  result_.verdict = Verdict::NotRejected;
  if (!streamExhausted && budget_reached()) {
    Rng rng(config_.seed);
    if (randomized_budget_verdict(result_.finalWealth, config_.alpha, rng)) {
      result_.verdict = Verdict::Rejected;
      result_.rejectionTime = *config_.budget;
    }
  }
  return std::move(result_);
}

TestResult run_betting_test(PayoffStream& stream, const Scenario& scenario,
                            const TestConfig& config) {
  config.validate();
  Learner learner = make_learner(config.learner, scenario, config.eta);
  StoppingRule rule(config);
  WealthState state;
  bool exhausted = false;
  while (!rule.budget_reached()) {
    const auto obs = stream.next();
    if (!obs) {
      exhausted = true;
      break;
    }
    const double theta = current_theta(learner);
    state = wealth_step(state, theta, obs->payoff);
    if (rule.record(state.wealth, state.logWealth, theta)) break;
    observe(learner, obs->payoff);
  }
  return rule.finish(exhausted);
}

}  // namespace betting
