#include "betting/engine.hpp"

#include <cmath>
#include <vector>

#include "betting/datagen.hpp"
#include "betting/error.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace {

using namespace betting;
using ::testing::DoubleNear;

const Scenario kDiff = Scenario::difference_in_means();

std::vector<Observation> constant_rows(double g, std::size_t n) {
  return std::vector<Observation>(n, Observation{0.0, 0.0, {g}});
}

TEST(Payoff, DiffMeans) {
  EXPECT_EQ(payoff_diff_means(0.5, 0.5).g, 0.0);
  EXPECT_EQ(payoff_diff_means(1.0, 0.0).g, 1.0);
  EXPECT_EQ(payoff_diff_means(0.3, 0.8).g, 0.3 - 0.8);
  EXPECT_THROW(payoff_diff_means(1.5, 0.2), DataError);
  EXPECT_THROW(payoff_diff_means(0.2, -0.1), DataError);
}

TEST(Payoff, OneSided) {
  EXPECT_EQ(payoff_one_sided(0.3, 0.3).g, 0.0);
  EXPECT_THAT(payoff_one_sided(0.3, 1.0).g, DoubleNear(-0.7, 1e-15));
  EXPECT_EQ(payoff_one_sided(0.1, 0.0).g, 0.1);
  EXPECT_THROW(payoff_one_sided(0.3, 1.01), DataError);
}

TEST(WealthStep, Arithmetic) {
  WealthState w;
  EXPECT_EQ(wealth_step(w, 0.0, {0.7}).wealth, 1.0);
  EXPECT_EQ(wealth_step(w, -0.5, {0.5}).wealth, 1.25);
  w.wealth = 2.0;
  w.logWealth = std::log(2.0);
  const auto n = wealth_step(w, 0.9, {-0.8});
  EXPECT_THAT(n.wealth, DoubleNear(3.44, 1e-14));
  EXPECT_THAT(n.logWealth, DoubleNear(std::log(3.44), 1e-14));
  EXPECT_EQ(n.round, 1u);
}

TEST(WealthStep, Guards) {
  WealthState w;
  EXPECT_THROW(wealth_step(w, 1.0, {1.0}), NumericalError);
  EXPECT_THROW(wealth_step(w, 2.0, {0.5}), NumericalError);
  w.stopped = true;
  EXPECT_THROW(wealth_step(w, 0.0, {0.0}), ConfigError);
}

TEST(Ville, Threshold) {
  EXPECT_TRUE(ville_reject(20.0, 0.05));
  EXPECT_FALSE(ville_reject(19.999, 0.05));
  EXPECT_FALSE(ville_reject(1.0, 0.5));
}

TEST(Ville, Randomized) {
  EXPECT_TRUE(randomized_budget_verdict_with(20.0, 0.05, 1.0));
  EXPECT_FALSE(randomized_budget_verdict_with(0.0, 0.05, 1e-9));
  EXPECT_TRUE(randomized_budget_verdict_with(10.0, 0.05, 0.4));
  EXPECT_FALSE(randomized_budget_verdict_with(10.0, 0.05, 0.6));
}

TEST(Ville, RandomizedConsumesOneDraw) {
  Rng a(42), b(42);
  randomized_budget_verdict(1.0, 0.05, a);
  b.uniform();
  EXPECT_EQ(a.bits(), b.bits());
}

TEST(Ville, RandomizedRateMatchesWealthTimesAlpha) {
  // P(reject) = min(1, W alpha).
  Rng rng(1);
  int hits = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) hits += randomized_budget_verdict(4.0, 0.05, rng);
  EXPECT_NEAR(hits / static_cast<double>(n), 0.2, 0.005);
}

TEST(RunBettingTest, ZeroStreamDependsOnlyOnVillDraw) {
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    VectorStream s(constant_rows(0.0, 100));
    TestConfig c;
    c.budget = 100;
    c.seed = seed;
    const auto r = run_betting_test(s, kDiff, c);
    EXPECT_EQ(r.finalWealth, 1.0);
    EXPECT_EQ(r.rounds, 100u);
    if (r.verdict == Verdict::Rejected) {
      ++rejected;
      EXPECT_EQ(r.rejectionTime, 100u);
    } else {
      EXPECT_FALSE(r.rejectionTime);
    }
  }
  EXPECT_NEAR(rejected / 2000.0, 0.05, 0.015);
}

TEST(RunBettingTest, FtrlConstantStreamMatchesReferenceTrace) {
  for (const double g : {0.9, -0.9, 0.35}) {
    for (const double alpha : {0.05, 0.01, 0.001}) {
      VectorStream s(constant_rows(g, 1000));
      TestConfig c;
      c.alpha = alpha;
      c.learner.kind = LearnerKind::Ftrl;
      const auto r = run_betting_test(s, kDiff, c);
      const std::size_t expected = oracle::ftrl_rejection_round(std::vector<double>(1000, g), 1.0, alpha);
      ASSERT_GT(expected, 0u);
      EXPECT_EQ(r.verdict, Verdict::Rejected);
      EXPECT_EQ(r.rejectionTime, expected) << g << ' ' << alpha;
    }
  }
}

TEST(RunBettingTest, ExhaustedStreamIsNotRejected) {
  VectorStream s(constant_rows(0.0, 10));
  TestConfig c;
  c.budget = 100;
  const auto r = run_betting_test(s, kDiff, c);
  EXPECT_EQ(r.verdict, Verdict::NotRejected);
  EXPECT_TRUE(r.streamExhausted);
  EXPECT_EQ(r.rounds, 10u);

  VectorStream u(constant_rows(0.01, 10));
  TestConfig unbounded;
  const auto ru = run_betting_test(u, kDiff, unbounded);
  EXPECT_EQ(ru.verdict, Verdict::NotRejected);
  EXPECT_EQ(ru.rounds, 10u);
}

TEST(RunBettingTest, LogIdentityAndTrajectories) {
  StreamSpec spec{kDiff, Hypothesis::H1, Uniform{0.2, 0.8}, Uniform{0.3, 0.9}};
  for (const auto kind : {LearnerKind::Ons, LearnerKind::Ftrl, LearnerKind::Oftrl}) {
    auto stream = make_stream(spec, 17);
    const auto rows = materialize(*stream, 400);
    VectorStream s(rows);
    TestConfig c;
    c.alpha = 1e-6;
    c.budget = 400;
    c.learner.kind = kind;
    c.recordTrajectory = true;
    const auto r = run_betting_test(s, kDiff, c);
    ASSERT_EQ(r.wealthTrajectory.size(), r.rounds);
    ASSERT_EQ(r.thetaTrajectory.size(), r.rounds);
    double sum = 0.0;
    for (std::size_t t = 0; t < r.rounds; ++t) sum += std::log(1.0 - rows[t].payoff.g * r.thetaTrajectory[t]);
    EXPECT_LE(std::abs(r.finalLogWealth - sum), 1e-9 * (1.0 + std::abs(r.finalLogWealth)));
    if (r.verdict == Verdict::Rejected && r.rejectionTime != c.budget) {
      EXPECT_TRUE(ville_reject(r.wealthTrajectory.back(), c.alpha));
    }
  }
}

TEST(RunBettingTest, Deterministic) {
  StreamSpec spec{kDiff, Hypothesis::H1, Uniform{0.2, 0.8}, Uniform{0.3, 0.9}};
  TestConfig c;
  c.budget = 50;
  c.seed = 99;
  c.recordTrajectory = true;
  auto s1 = make_stream(spec, 4);
  auto s2 = make_stream(spec, 4);
  const auto a = run_betting_test(*s1, kDiff, c);
  const auto b = run_betting_test(*s2, kDiff, c);
  EXPECT_EQ(a.verdict, b.verdict);
  EXPECT_EQ(a.wealthTrajectory, b.wealthTrajectory);
  EXPECT_EQ(a.thetaTrajectory, b.thetaTrajectory);
}

TEST(TestConfig, Validation) {
  TestConfig c;
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.alpha = 0.1;
  c.eta = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.eta = 1.0;
  c.budget = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Verdict, Names) {
  EXPECT_EQ(to_string(Verdict::Rejected), "REJECTED");
  EXPECT_EQ(to_string(Verdict::NotRejected), "NOT_REJECTED");
}

}  // namespace
