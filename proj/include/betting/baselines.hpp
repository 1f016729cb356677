#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "betting/engine.hpp"
#include "betting/types.hpp"

namespace betting {

/// Payoff history for the batch portfolio statistics.
///
/// `coefficients` caches the per-round slope c_s of the empirical log-wealth
/// ln W(theta) = sum_s ln(1 - c_s theta): c_s = g_s for difference-in-means
/// and c_s = g_s / mu0 for one-sided testing.
class HistoryBuffer {
public:
  explicit HistoryBuffer(const Scenario& scenario);

  void push(const Observation& obs);
  void clear();

  std::size_t size() const { return payoffs_.size(); }
  bool empty() const { return payoffs_.empty(); }
  const Scenario& scenario() const { return scenario_; }
  std::span<const double> payoffs() const { return payoffs_; }
  std::span<const double> raw_samples() const { return rawSamples_; }
  std::span<const double> coefficients() const { return coefficients_; }

private:
  Scenario scenario_;
  std::vector<double> payoffs_;
  std::vector<double> rawSamples_;
  std::vector<double> coefficients_;
};

struct MaxResult {
  double thetaMax = 0.0;
  double value = 0.0;
};

/// Feasible part of `space` where every 1 - c*theta >= 1e-12.
DecisionSpace feasible_interval(std::span<const double> coefficients, DecisionSpace space);

/// Maximizes sum ln(1 - c*theta) over the feasible part of `space`.
/// The objective is concave with a monotone derivative; a flat objective
/// (all c == 0) returns `tieBreak` with value 0.
MaxResult maximize_log_wealth(std::span<const double> coefficients, DecisionSpace space,
                              double tieBreak);

/// Empirical best fixed bet over the portfolio space of the history's scenario.
MaxResult max_log_wealth(const HistoryBuffer& history);

struct PortfolioStat {
  double thetaMax = 0.0;
  double logWealthHat = 0.0;
  double logStatistic = 0.0;
  double statistic = 0.0;
};

PortfolioStat co96(const HistoryBuffer& history);
PortfolioStat oj23(const HistoryBuffer& history);

/// Two-asset weight matching theta_max (see README).
double oj23_lambda(const Scenario& s, double thetaMax);
/// max_{j=0..t} ln(pi lambda^j (1-lambda)^(t-j) Gamma(t+1) / (Gamma(j+1/2) Gamma(t-j+1/2))).
double oj23_penalty(std::size_t t, double lambda);

double log_gamma(double x);

enum class PortfolioKind { Co96, Oj23 };

std::string to_string(PortfolioKind k);

/// Sequential test with the statistic recomputed from the full history each
/// round. Same stopping and budget semantics as run_betting_test; the
/// trajectory's theta entries are theta_max.
TestResult run_portfolio_test(PayoffStream& stream, const Scenario& scenario, PortfolioKind kind,
                              const TestConfig& config);

}  // namespace betting
