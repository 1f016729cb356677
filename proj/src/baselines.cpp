#include "betting/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "betting/error.hpp"

namespace betting {

namespace {

constexpr double kFeasibleEps = 1e-12;

struct Derivatives {
  double first = 0.0;
  double second = 0.0;
};

// d/dtheta and d2/dtheta2 of sum ln(1 - c theta).
Derivatives derivatives(std::span<const double> coeffs, double theta) {
  Derivatives d;
  for (const double c : coeffs) {
    const double q = c / (1.0 - c * theta);
    d.first -= q;
    d.second -= q * q;
  }
  return d;
}

double log_wealth(std::span<const double> coeffs, double theta) {
  double v = 0.0;
  for (const double c : coeffs) v += std::log1p(-c * theta);
  return v;
}

// Root of the strictly decreasing derivative inside (lo, hi), given
// d(lo) > 0 > d(hi). Newton steps with a bisection fallback whenever the
// step leaves the bracket or stalls.
double derivative_root(std::span<const double> coeffs, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  double dxOld = hi - lo;
  double dx = dxOld;
  for (int it = 0; it < 200; ++it) {
    const Derivatives d = derivatives(coeffs, x);
    if (d.first == 0.0) return x;
    if (d.first > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - d.first / d.second;
    if (!(next > lo && next < hi) || std::abs(2.0 * d.first) > std::abs(dxOld * d.second)) {
      dxOld = dx;
      next = 0.5 * (lo + hi);
    } else {
      dxOld = dx;
    }
    dx = next - x;
    x = next;
    if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-15) return x;
  }
  return x;
}

double xlogy(double k, double y) {
  if (k == 0.0) return 0.0;
  if (y <= 0.0) return -std::numeric_limits<double>::infinity();
  return k * std::log(y);
}

double lgamma_half(std::size_t k) {
  // lgamma(k + 1/2), memoized per thread.
  thread_local std::vector<double> table;
  while (table.size() <= k) table.push_back(log_gamma(static_cast<double>(table.size()) + 0.5));
  return table[k];
}

}  // namespace

HistoryBuffer::HistoryBuffer(const Scenario& scenario) : scenario_(scenario) {
  if (scenario_.one_sided() && !(scenario_.mu0 > 0.0)) {
    throw ConfigError("portfolio statistics need mu0 > 0 for one-sided testing");
  }
}

void HistoryBuffer::push(const Observation& obs) {
  payoffs_.push_back(obs.payoff.g);
  rawSamples_.push_back(obs.x);
  coefficients_.push_back(scenario_.one_sided() ? obs.payoff.g / scenario_.mu0 : obs.payoff.g);
}

void HistoryBuffer::clear() {
  payoffs_.clear();
  rawSamples_.clear();
  coefficients_.clear();
}

DecisionSpace feasible_interval(std::span<const double> coefficients, DecisionSpace space) {
  double lo = space.lo, hi = space.hi;
  for (const double c : coefficients) {
    if (c > 0.0) {
      hi = std::min(hi, (1.0 - kFeasibleEps) / c);
    } else if (c < 0.0) {
      lo = std::max(lo, (1.0 - kFeasibleEps) / c);
    }
  }
  if (!(lo <= hi)) throw NumericalError("empty feasible interval for the log-wealth maximizer");
  return {lo, hi, false};
}

MaxResult maximize_log_wealth(std::span<const double> coefficients, DecisionSpace space,
                              double tieBreak) {
  if (coefficients.empty()) throw ConfigError("max_log_wealth on an empty history");
  const bool flat =
      std::all_of(coefficients.begin(), coefficients.end(), [](double c) { return c == 0.0; });
  if (flat) return {std::clamp(tieBreak, space.lo, space.hi), 0.0};

  const DecisionSpace f = feasible_interval(coefficients, space);
  double theta;
  if (derivatives(coefficients, f.lo).first <= 0.0) {
    theta = f.lo;
  } else if (derivatives(coefficients, f.hi).first >= 0.0) {
    theta = f.hi;
  } else {
    theta = derivative_root(coefficients, f.lo, f.hi);
  }
  return {theta, log_wealth(coefficients, theta)};
}

MaxResult max_log_wealth(const HistoryBuffer& history) {
  const Scenario& s = history.scenario();
  return maximize_log_wealth(history.coefficients(), portfolio_space(s), s.one_sided() ? 0.5 : 0.0);
}

PortfolioStat co96(const HistoryBuffer& history) {
  const MaxResult m = max_log_wealth(history);
  const double t = static_cast<double>(history.size());
  PortfolioStat s;
  s.thetaMax = m.thetaMax;
  s.logWealthHat = m.value;
  s.logStatistic = m.value - 0.5 * std::log(t + 1.0) - std::numbers::ln2;
  s.statistic = std::exp(s.logStatistic);
  return s;
}

double oj23_lambda(const Scenario& s, double thetaMax) {
  return s.one_sided() ? thetaMax : 0.5 * (1.0 + thetaMax);
}

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double oj23_penalty(std::size_t t, double lambda) {
  const double tt = static_cast<double>(t);
  const double common = std::log(std::numbers::pi) + log_gamma(tt + 1.0);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= t; ++j) {
    const double jj = static_cast<double>(j);
    const double term = common + xlogy(jj, lambda) + xlogy(tt - jj, 1.0 - lambda) -
                        lgamma_half(j) - lgamma_half(t - j);
    best = std::max(best, term);
  }
  return best;
}

PortfolioStat oj23(const HistoryBuffer& history) {
  const MaxResult m = max_log_wealth(history);
  const double lambda = oj23_lambda(history.scenario(), m.thetaMax);
  PortfolioStat s;
  s.thetaMax = m.thetaMax;
  s.logWealthHat = m.value;
  s.logStatistic = m.value - oj23_penalty(history.size(), lambda);
  s.statistic = std::exp(s.logStatistic);
  return s;
}

std::string to_string(PortfolioKind k) { return k == PortfolioKind::Co96 ? "co96" : "oj23"; }

TestResult run_portfolio_test(PayoffStream& stream, const Scenario& scenario, PortfolioKind kind,
                              const TestConfig& config) {
  config.validate();
  HistoryBuffer history(scenario);
  StoppingRule rule(config);
  bool exhausted = false;
  while (!rule.budget_reached()) {
    const auto obs = stream.next();
    if (!obs) {
      exhausted = true;
      break;
    }
    history.push(*obs);
    const PortfolioStat s = kind == PortfolioKind::Co96 ? co96(history) : oj23(history);
    if (rule.record(s.statistic, s.logStatistic, s.thetaMax)) break;
  }
  return rule.finish(exhausted);
}

}  // namespace betting
