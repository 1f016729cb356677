#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "betting/learners.hpp"
#include "betting/random.hpp"
#include "betting/types.hpp"

namespace betting {

/// g = x - y. Both samples must lie in [0,1].
Payoff payoff_diff_means(double x, double y);
/// g = mu0 - x.
Payoff payoff_one_sided(double mu0, double x);
/// Builds the observation for a scenario, validating ranges.
Observation make_observation(const Scenario& s, double x, double y = 0.0);

enum class Verdict { Running, Rejected, NotRejected };

std::string to_string(Verdict v);

struct WealthState {
  double wealth = 1.0;
  double logWealth = 0.0;
  std::uint64_t round = 0;
  bool stopped = false;
  Verdict verdict = Verdict::Running;
};

/// Smallest admissible 1 - theta*g before a step is refused.
inline constexpr double kMinWealthFactor = 1e-12;

/// W' = W (1 - theta g). Throws NumericalError when 1 - theta g < 1e-12 and
/// ConfigError when the state is already stopped.
WealthState wealth_step(const WealthState& state, double theta, Payoff g);

/// Ville's threshold: wealth >= 1/alpha.
bool ville_reject(double wealth, double alpha);

/// Randomized Ville at budget exhaustion. Consumes exactly one draw nu ~ U[0,1]
/// and rejects iff finalWealth >= nu/alpha.
bool randomized_budget_verdict(double finalWealth, double alpha, Rng& rng);
bool randomized_budget_verdict_with(double finalWealth, double alpha, double nu);

struct TestConfig {
  double alpha = 0.05;
  std::optional<std::uint64_t> budget;  // nullopt = unbounded
  double eta = 1.0;
  LearnerSpec learner;
  std::uint64_t seed = 0;  // drives the randomized Ville draw only
  bool recordTrajectory = false;

  void validate() const;
};

struct TestResult {
  Verdict verdict = Verdict::NotRejected;
  std::optional<std::uint64_t> rejectionTime;
  double finalWealth = 1.0;
  double finalLogWealth = 0.0;
  std::uint64_t rounds = 0;
  bool streamExhausted = false;
  // Filled only when TestConfig::recordTrajectory is set; one entry per round.
  std::vector<double> wealthTrajectory;
  std::vector<double> logWealthTrajectory;
  std::vector<double> thetaTrajectory;
};

/// Sequential test by betting with a streaming learner.
///
/// Each round plays theta_t, observes g_t, updates the wealth, checks the
/// post-update wealth against 1/alpha, and only then feeds the loss to the
/// learner. A finite budget that is reached without a crossing ends with the
/// randomized Ville rule; a stream that ends first yields NotRejected.
TestResult run_betting_test(PayoffStream& stream, const Scenario& scenario,
                            const TestConfig& config);

/// Shared end-of-run logic for any wealth-like statistic.
class StoppingRule {
public:
  explicit StoppingRule(const TestConfig& config);

  /// Records one round's statistic. Returns true when the test stops.
  bool record(double wealth, double logWealth, double theta);
  /// Finishes a run that did not cross the threshold.
  TestResult finish(bool streamExhausted);
  bool budget_reached() const;
  std::uint64_t round() const { return result_.rounds; }

private:
  const TestConfig& config_;
  TestResult result_;
};

}  // namespace betting
