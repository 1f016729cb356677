#include "betting/learners.hpp"

#include <cmath>
#include <random>

#include "betting/error.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace {

using namespace betting;
using ::testing::DoubleNear;

const Scenario kDiff = Scenario::difference_in_means();
const Scenario kOne = Scenario::one_sided(0.3);

TEST(Loss, HandValues) {
  EXPECT_EQ(loss({0.0}, 0.7), 0.0);
  EXPECT_THAT(loss({0.5}, -1.0), DoubleNear(-std::log(1.5), 1e-15));
  EXPECT_THAT(loss({0.5}, 0.5), DoubleNear(0.287682072451781, 1e-12));
}

TEST(Loss, UndefinedThrows) {
  EXPECT_THROW(loss({1.0}, 1.0), NumericalError);
  EXPECT_THROW(grad({0.5}, 3.0), NumericalError);
}

TEST(Grad, HandValues) {
  EXPECT_EQ(grad({0.5}, 0.0), 0.5);
  EXPECT_EQ(grad({0.0}, 0.9), 0.0);
  EXPECT_THAT(grad({-0.8}, 0.5), DoubleNear(-0.8 / 1.4, 1e-15));
}

TEST(ClosedForm, SpecPoints) {
  EXPECT_EQ(ftrl_closed_form(0.0, BarrierKind::Symmetric), 0.0);
  EXPECT_THAT(ftrl_closed_form(1.0, BarrierKind::Symmetric), DoubleNear(1.0 - std::sqrt(2.0), 1e-15));
  EXPECT_THAT(ftrl_closed_form(-3.0, BarrierKind::Symmetric),
              DoubleNear((std::sqrt(10.0) - 1.0) / 3.0, 1e-15));
  EXPECT_EQ(ftrl_closed_form(0.0, BarrierKind::UnitInterval), 0.5);
  EXPECT_THAT(ftrl_closed_form(2.0, BarrierKind::UnitInterval),
              DoubleNear((4.0 - std::sqrt(8.0)) / 4.0, 1e-15));
}

TEST(ClosedForm, MatchesGoldenSection) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(gen);
    EXPECT_THAT(ftrl_closed_form(a, BarrierKind::Symmetric), DoubleNear(oracle::ftrl_min_symmetric(a), 1e-6));
    EXPECT_THAT(ftrl_closed_form(a, BarrierKind::UnitInterval), DoubleNear(oracle::ftrl_min_unit(a), 1e-6));
  }
}

TEST(ClosedForm, MatchesTextbookFormInLongDouble) {
  for (double a = -40.0; a <= 40.0; a += 0.37) {
    EXPECT_THAT(ftrl_closed_form(a, BarrierKind::Symmetric), DoubleNear(oracle::naive_symmetric(a), 1e-14));
    EXPECT_THAT(ftrl_closed_form(a, BarrierKind::UnitInterval), DoubleNear(oracle::naive_unit(a), 1e-14));
  }
}

TEST(ClosedForm, StationarityResidual) {
  for (double a = -50.0; a <= 50.0; a += 0.731) {
    for (const auto kind : {BarrierKind::Symmetric, BarrierKind::UnitInterval}) {
      const double t = ftrl_closed_form(a, kind);
      EXPECT_LE(std::abs(a + barrier_gradient(t, kind)), 1e-8 * (1.0 + std::abs(a))) << a;
    }
  }
}

TEST(ClosedForm, LargeArgumentsStayInterior) {
  for (const double a : {1e6, -1e6, 1e15, -1e15, 1e300, -1e300}) {
    const double s = ftrl_closed_form(a, BarrierKind::Symmetric);
    EXPECT_GT(s, -1.0);
    EXPECT_LT(s, 1.0);
    EXPECT_GE(1.0 - std::abs(s), 1e-12 * 0.999);
    const double u = ftrl_closed_form(a, BarrierKind::UnitInterval);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_THROW(ftrl_closed_form(std::nan(""), BarrierKind::Symmetric), NumericalError);
  EXPECT_THROW(ftrl_closed_form(INFINITY, BarrierKind::UnitInterval), NumericalError);
}

TEST(FtrlUpdate, SingleObservation) {
  const auto s = FtrlState::init(1.0, BarrierKind::Symmetric);
  EXPECT_EQ(s.currentTheta, 0.0);
  const auto step = ftrl_update(s, {0.5});
  EXPECT_EQ(step.state.cumGrad, 0.5);
  EXPECT_THAT(step.nextTheta, DoubleNear((1.0 - std::sqrt(1.25)) / 0.5, 1e-15));
}

TEST(FtrlUpdate, TwoObservationsMatchReferenceTrace) {
  auto s = ftrl_update(FtrlState::init(1.0, BarrierKind::Symmetric), {0.5}).state;
  const double theta2 = s.currentTheta;
  s = ftrl_update(s, {-0.5}).state;
  const long double G = 0.5L + (-0.5L) / (1.0L - (-0.5L) * theta2);
  EXPECT_THAT(s.cumGrad, DoubleNear(static_cast<double>(G), 1e-15));
  EXPECT_THAT(s.currentTheta, DoubleNear(oracle::naive_symmetric(G), 1e-15));
  EXPECT_THAT(s.cumGrad, DoubleNear(-0.066915, 1e-6));
}

TEST(FtrlUpdate, ZeroStreamStaysPut) {
  auto s = FtrlState::init(1.0, BarrierKind::Symmetric);
  for (int i = 0; i < 100; ++i) s = ftrl_update(s, {0.0}).state;
  EXPECT_EQ(s.currentTheta, 0.0);
}

TEST(Oftrl, LastGradientHint) {
  const auto s = OftrlState::init(1.0, BarrierKind::Symmetric, HintPolicy::LastGradient);
  const auto step = oftrl_update(s, {0.5});
  EXPECT_EQ(step.state.hint, 0.5);
  EXPECT_THAT(step.nextTheta, DoubleNear(1.0 - std::sqrt(2.0), 1e-15));
}

TEST(Oftrl, ZeroHintIsFtrlBitExact) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto kind : {BarrierKind::Symmetric, BarrierKind::UnitInterval}) {
    auto f = FtrlState::init(0.7, kind);
    auto o = OftrlState::init(0.7, kind, HintPolicy::Zero);
    for (int t = 0; t < 2000; ++t) {
      Payoff g{u(gen)};
      if (kind == BarrierKind::UnitInterval) g.g = 0.3 - (u(gen) + 1.0) / 2.0;
      f = ftrl_update(f, g).state;
      o = oftrl_update(o, g).state;
      ASSERT_EQ(f.currentTheta, o.base.currentTheta);
      ASSERT_EQ(f.cumGrad, o.base.cumGrad);
    }
  }
}

TEST(Oftrl, ConstantStreamBetsAtLeastAsHard) {
  auto f = FtrlState::init(1.0, BarrierKind::Symmetric);
  auto o = OftrlState::init(1.0, BarrierKind::Symmetric, HintPolicy::LastGradient);
  for (int t = 0; t < 50; ++t) {
    EXPECT_GE(std::abs(o.base.currentTheta), std::abs(f.currentTheta)) << t;
    f = ftrl_update(f, {0.5}).state;
    o = oftrl_update(o, {0.5}).state;
  }
}

TEST(HintPolicy, Values) {
  auto s = OftrlState::init(1.0, BarrierKind::Symmetric, HintPolicy::LastGradient);
  EXPECT_EQ(hint_policy(s, {0.5}), 0.5);
  s.base.currentTheta = 0.5;
  EXPECT_THAT(hint_policy(s, {-0.8}), DoubleNear(-0.571429, 1e-6));
  s.policy = HintPolicy::Zero;
  EXPECT_EQ(hint_policy(s, {-0.8}), 0.0);
}

TEST(Ons, FirstStepClipsToHalf) {
  const auto s = OnsState::init(kDiff);
  EXPECT_EQ(s.currentTheta, 0.0);
  EXPECT_EQ(s.accumulator, 1.0);
  const auto step = ons_update(s, {0.5});
  EXPECT_EQ(step.state.accumulator, 1.25);
  EXPECT_EQ(step.nextTheta, -0.5);
  EXPECT_THAT(kOnsStepScale * 0.4, DoubleNear(0.8 / (2.0 - std::log(3.0)), 1e-15));
}

TEST(Ons, ZeroPayoffIsNoOp) {
  const auto s = OnsState::init(kDiff);
  const auto step = ons_update(s, {0.0});
  EXPECT_EQ(step.state.accumulator, 1.0);
  EXPECT_EQ(step.nextTheta, 0.0);
}

TEST(Ons, OneSidedReferenceTrace) {
  const auto step = ons_update(OnsState::init(kOne), {-0.3});
  EXPECT_THAT(step.state.accumulator, DoubleNear(1.09, 1e-15));
  const double raw = 0.0 - 2.0 / (2.0 - std::log(3.0)) * (-0.3) / 1.09;
  EXPECT_THAT(step.nextTheta, DoubleNear(std::min(0.5, raw), 1e-15));
  EXPECT_THAT(kOnsStepScale, DoubleNear(2.0 / (2.0 - std::log(3.0)), 1e-15));
}

TEST(Ons, ContainmentAndMonotoneAccumulator) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Scenario& sc : {kDiff, kOne}) {
    auto s = OnsState::init(sc);
    for (int t = 0; t < 5000; ++t) {
      const double g = sc.one_sided() ? 0.3 - (u(gen) + 1.0) / 2.0 : u(gen);
      const double before = s.accumulator;
      s = ons_update(s, {g}).state;
      ASSERT_GE(s.accumulator, before);
      ASSERT_TRUE(s.space.contains(s.currentTheta));
      ASSERT_GE(1.0 - g * s.currentTheta, 0.5);
    }
  }
}

TEST(Barrier, Values) {
  EXPECT_EQ(barrier_value(0.0, BarrierKind::Symmetric), 0.0);
  EXPECT_THAT(barrier_value(0.5, BarrierKind::UnitInterval), DoubleNear(-2.0 * std::log(0.5), 1e-15));
  EXPECT_THAT(barrier_value(0.9, BarrierKind::Symmetric), DoubleNear(1.660731206821651, 1e-12));
  EXPECT_THROW(barrier_value(1.0, BarrierKind::Symmetric), ConfigError);
  EXPECT_THROW(barrier_value(0.0, BarrierKind::UnitInterval), ConfigError);
}

TEST(Barrier, SelfConcordance) {
  for (const auto kind : {BarrierKind::Symmetric, BarrierKind::UnitInterval}) {
    const auto d = barrier_domain(kind);
    for (int i = 1; i < 1000; ++i) {
      const double t = d.lo + (d.hi - d.lo) * i / 1000.0;
      const double h = barrier_hessian(t, kind);
      EXPECT_LE(std::abs(barrier_third(t, kind)), 2.0 * std::pow(h, 1.5) + 1e-9);
    }
  }
}

TEST(Barrier, DerivativesMatchFiniteDifferences) {
  for (const auto kind : {BarrierKind::Symmetric, BarrierKind::UnitInterval}) {
    for (const double t : {0.1, 0.3, 0.5, 0.8}) {
      const double h = 1e-6;
      const double fd1 = (barrier_value(t + h, kind) - barrier_value(t - h, kind)) / (2 * h);
      const double fd2 = (barrier_gradient(t + h, kind) - barrier_gradient(t - h, kind)) / (2 * h);
      const double fd3 = (barrier_hessian(t + h, kind) - barrier_hessian(t - h, kind)) / (2 * h);
      EXPECT_THAT(barrier_gradient(t, kind), DoubleNear(fd1, 1e-6 * (1 + std::abs(fd1))));
      EXPECT_THAT(barrier_hessian(t, kind), DoubleNear(fd2, 1e-6 * (1 + std::abs(fd2))));
      EXPECT_THAT(barrier_third(t, kind), DoubleNear(fd3, 1e-5 * (1 + std::abs(fd3))));
    }
  }
}

TEST(DualNorm, Values) {
  EXPECT_EQ(dual_norm_sq({1.0}, 0.0, BarrierKind::Symmetric), 0.5);
  EXPECT_EQ(dual_norm_sq({0.0}, 0.3, BarrierKind::Symmetric), 0.0);
  for (double g = -1.0; g <= 1.0; g += 0.01) {
    for (double t = -0.999; t < 1.0; t += 0.003) {
      EXPECT_LE(dual_norm_sq({g}, t, BarrierKind::Symmetric), 1.0);
    }
  }
}

TEST(Learner, ObserveReturnsPlayedGradient) {
  for (const auto kind : {LearnerKind::Ons, LearnerKind::Ftrl, LearnerKind::Oftrl}) {
    Learner l = make_learner({kind, HintPolicy::LastGradient}, kDiff, 1.0);
    const double theta = current_theta(l);
    EXPECT_EQ(observe(l, {-0.4}), grad({-0.4}, theta));
  }
  Learner one = make_learner({LearnerKind::Ftrl, HintPolicy::LastGradient}, kOne, 1.0);
  EXPECT_EQ(current_theta(one), 0.5);
  EXPECT_THROW(FtrlState::init(0.0, BarrierKind::Symmetric), ConfigError);
}

}  // namespace
