#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "betting/types.hpp"

namespace betting {

// Log-loss of a bet and its barrier-regularized learners.
//
// The loss of round t is l(theta) = -ln(1 - g*theta). FTRL and optimistic
// FTRL minimize eta*<G, theta> + R(theta) over the open decision space,
// which has a closed form for both barriers below. ONS is the projected
// Newton-style baseline on the halved space.

enum class BarrierKind {
  Symmetric,     // R = -ln(1-theta) - ln(1+theta) on (-1,1)
  UnitInterval,  // R = -ln(theta) - ln(1-theta) on (0,1)
};

BarrierKind barrier_for(const Scenario& s);
DecisionSpace barrier_domain(BarrierKind kind);

/// Distance from the boundary kept by the closed form against rounding.
inline constexpr double kBoundaryEps = 1e-12;

double loss(Payoff g, double theta);
double grad(Payoff g, double theta);

double barrier_value(double theta, BarrierKind kind);
double barrier_gradient(double theta, BarrierKind kind);
double barrier_hessian(double theta, BarrierKind kind);
double barrier_third(double theta, BarrierKind kind);

/// Squared local dual norm (dl/dtheta)^2 / R''(theta).
double dual_norm_sq(Payoff g, double theta, BarrierKind kind);

/// argmin over the open domain of a*theta + R(theta).
double ftrl_closed_form(double a, BarrierKind kind);

template <class State>
struct Step {
  State state;
  double nextTheta;
};

struct FtrlState {
  double eta = 1.0;
  double cumGrad = 0.0;
  BarrierKind barrier = BarrierKind::Symmetric;
  double currentTheta = 0.0;

  static FtrlState init(double eta, BarrierKind barrier);
};

Step<FtrlState> ftrl_update(const FtrlState& state, Payoff g);

enum class HintPolicy {
  LastGradient,  // m_{t+1} = gradient of the round just observed
  Zero,          // reduces to plain FTRL
};

struct OftrlState {
  FtrlState base;
  double hint = 0.0;
  HintPolicy policy = HintPolicy::LastGradient;

  static OftrlState init(double eta, BarrierKind barrier, HintPolicy policy);
};

double hint_policy(const OftrlState& state, Payoff g);
Step<OftrlState> oftrl_update(const OftrlState& state, Payoff g);

struct OnsState {
  double currentTheta = 0.0;
  double accumulator = 1.0;
  DecisionSpace space{-0.5, 0.5, false};

  static OnsState init(const Scenario& s);
};

/// 2 / (2 - ln 3)
inline constexpr double kOnsStepScale = 2.218801049600289;

Step<OnsState> ons_update(const OnsState& state, Payoff g);

enum class LearnerKind { Ons, Ftrl, Oftrl };

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Ftrl;
  HintPolicy hint = HintPolicy::LastGradient;
};

using Learner = std::variant<OnsState, FtrlState, OftrlState>;

Learner make_learner(const LearnerSpec& spec, const Scenario& s, double eta);
double current_theta(const Learner& learner);
/// Feeds round's payoff; returns the gradient at the played theta.
double observe(Learner& learner, Payoff g);

std::string to_string(LearnerKind kind);

}  // namespace betting
