#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "betting/baselines.hpp"
#include "betting/datagen.hpp"
#include "betting/learners.hpp"

namespace betting {

struct RegretTrace {
  std::vector<double> perRoundLoss;
  std::vector<double> comparatorLoss;
  std::vector<double> cumulativeRegret;
};

/// Cumulative regret of the played bets against a fixed comparator.
/// Throws ConfigError if the comparator makes some 1 - g*theta <= 0.
RegretTrace regret_trace(std::span<const double> thetas, std::span<const double> payoffs,
                         double comparator);

struct Comparator {
  double theta = 0.0;
  bool adjusted = false;
};

/// Pulls a comparator inward (to the feasibility edge minus 1e-9) when it
/// would make some round's wealth factor nonpositive.
Comparator feasible_comparator(std::span<const double> payoffs, double theta);

/// Best fixed bet in hindsight for sum ln(1 - g*theta) over `space`.
double best_fixed_empirical(std::span<const double> payoffs, DecisionSpace space);
double best_fixed_empirical(const HistoryBuffer& history, DecisionSpace space);

struct OracleResult {
  double thetaStar = 0.0;
  double omegaStar = 0.0;
};

/// Discrete payoff law: atoms g with probability weights summing to 1.
struct PayoffAtom {
  double g;
  double weight;
};

/// Quadrature (continuous laws) or exact atoms (Bernoulli) of the payoff.
/// Throws ConfigError for invalid specs.
std::vector<PayoffAtom> payoff_law(const StreamSpec& spec, std::size_t nodesPerUnit = 160);

/// E[ln(1 - g theta)]
double expected_log_growth(std::span<const PayoffAtom> law, double theta);

/// Population comparator: grid search at `gridResolution` over the feasible
/// part of `space`, refined by golden-section.
OracleResult theta_star_oracle(std::span<const PayoffAtom> law, DecisionSpace space,
                               double gridResolution);
OracleResult theta_star_oracle(const StreamSpec& spec, double gridResolution);

struct GrowthFit {
  std::size_t t0 = 0;
  double c = 0.0;
  bool satisfied = false;
};

/// Largest c on a 200-point log grid over [1e-3, 1] x scale (scale = max_t
/// |G_t|/t) such that |G_t| >= c t for every t >= t0, with t0 in the first
/// half of the record. t0 is the smallest such index (1-based).
GrowthFit growth_fit(std::span<const double> cumGrads);

/// max_t eta * ||grad l_t(theta_t)||*_{theta_t}
double lemma6_audit(std::span<const double> thetas, std::span<const double> payoffs, double eta,
                    BarrierKind kind);

/// ln(1/alpha) / omega*
double rejection_lower_reference(double alpha, double omegaStar);

/// Played bets, payoffs, and cumulative gradients of a learner run with no
/// stopping rule, for offline diagnostics.
struct LearnerTrace {
  std::vector<double> thetas;
  std::vector<double> payoffs;
  std::vector<double> cumGrads;
  double logWealth = 0.0;
};

LearnerTrace trace_learner(PayoffStream& stream, const Scenario& scenario,
                           const LearnerSpec& spec, double eta, std::size_t rounds);

}  // namespace betting
