#include "betting/learners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "betting/error.hpp"

namespace betting {

namespace {

double wealth_factor(Payoff g, double theta) {
  const double f = 1.0 - g.g * theta;
  if (!(f > 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "log-loss undefined: 1 - g*theta = " << f << " (g = " << g.g << ", theta = " << theta
        << ")";
    throw NumericalError(msg.str());
  }
  return f;
}

void check_interior(double theta, BarrierKind kind) {
  const DecisionSpace d = barrier_domain(kind);
  if (!d.contains(theta)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "theta = " << theta << " outside the open barrier domain (" << d.lo << ", " << d.hi
        << ")";
    throw ConfigError(msg.str());
  }
}

}  // namespace

BarrierKind barrier_for(const Scenario& s) {
  return s.one_sided() ? BarrierKind::UnitInterval : BarrierKind::Symmetric;
}

DecisionSpace barrier_domain(BarrierKind kind) {
  return kind == BarrierKind::Symmetric ? DecisionSpace{-1.0, 1.0, true}
                                        : DecisionSpace{0.0, 1.0, true};
}

double loss(Payoff g, double theta) { return -std::log(wealth_factor(g, theta)); }

double grad(Payoff g, double theta) { return g.g / wealth_factor(g, theta); }

double barrier_value(double theta, BarrierKind kind) {
  check_interior(theta, kind);
  if (kind == BarrierKind::Symmetric) return -std::log1p(-theta) - std::log1p(theta);
  return -std::log(theta) - std::log1p(-theta);
}

double barrier_gradient(double theta, BarrierKind kind) {
  check_interior(theta, kind);
  if (kind == BarrierKind::Symmetric) return 1.0 / (1.0 - theta) - 1.0 / (1.0 + theta);
  return -1.0 / theta + 1.0 / (1.0 - theta);
}

double barrier_hessian(double theta, BarrierKind kind) {
  check_interior(theta, kind);
  if (kind == BarrierKind::Symmetric) {
    const double t2 = theta * theta;
    const double d = 1.0 - t2;
    return (2.0 + 2.0 * t2) / (d * d);
  }
  const double u = 1.0 - theta;
  return 1.0 / (theta * theta) + 1.0 / (u * u);
}

double barrier_third(double theta, BarrierKind kind) {
  check_interior(theta, kind);
  if (kind == BarrierKind::Symmetric) {
    const double m = 1.0 - theta, p = 1.0 + theta;
    return 2.0 / (m * m * m) - 2.0 / (p * p * p);
  }
  const double u = 1.0 - theta;
  return -2.0 / (theta * theta * theta) + 2.0 / (u * u * u);
}

double dual_norm_sq(Payoff g, double theta, BarrierKind kind) {
  const double d = grad(g, theta);
  return d * d / barrier_hessian(theta, kind);
}

double ftrl_closed_form(double a, BarrierKind kind) {
  if (!std::isfinite(a)) {
    throw NumericalError("ftrl_closed_form: non-finite linear coefficient");
  }
  double theta;
  if (kind == BarrierKind::Symmetric) {
    // (1 - sqrt(1+a^2)) / a, rationalized.
    if (a == 0.0) return 0.0;
    theta = -a / (1.0 + std::hypot(1.0, a));
  } else {
    // (2 + a - sqrt(4+a^2)) / (2a); the two rationalized branches avoid
    // cancellation for small |a| and for a -> -inf respectively.
    const double s = std::hypot(2.0, a);
    theta = a >= 0.0 ? 2.0 / (2.0 + a + s) : (s - a) / (s - a + 2.0);
  }
  const DecisionSpace d = barrier_domain(kind);
  return std::clamp(theta, d.lo + kBoundaryEps, d.hi - kBoundaryEps);
}

FtrlState FtrlState::init(double eta, BarrierKind barrier) {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  return {eta, 0.0, barrier, ftrl_closed_form(0.0, barrier)};
}

Step<FtrlState> ftrl_update(const FtrlState& state, Payoff g) {
  FtrlState next = state;
  next.cumGrad = state.cumGrad + grad(g, state.currentTheta);
  next.currentTheta = ftrl_closed_form(state.eta * next.cumGrad, state.barrier);
  return {next, next.currentTheta};
}

OftrlState OftrlState::init(double eta, BarrierKind barrier, HintPolicy policy) {
  return {FtrlState::init(eta, barrier), 0.0, policy};
}

double hint_policy(const OftrlState& state, Payoff g) {
  switch (state.policy) {
    case HintPolicy::LastGradient: return grad(g, state.base.currentTheta);
    case HintPolicy::Zero: return 0.0;
  }
  return 0.0;
}

Step<OftrlState> oftrl_update(const OftrlState& state, Payoff g) {
  OftrlState next = state;
  next.base.cumGrad = state.base.cumGrad + grad(g, state.base.currentTheta);
  next.hint = hint_policy(state, g);
  next.base.currentTheta =
      ftrl_closed_form(state.base.eta * (next.base.cumGrad + next.hint), state.base.barrier);
  return {next, next.base.currentTheta};
}

OnsState OnsState::init(const Scenario& s) { return {0.0, 1.0, ons_space(s)}; }

Step<OnsState> ons_update(const OnsState& state, Payoff g) {
  const double b = grad(g, state.currentTheta);
  OnsState next = state;
  next.accumulator = state.accumulator + b * b;
  const double raw = state.currentTheta - kOnsStepScale * b / next.accumulator;
  next.currentTheta = std::clamp(raw, state.space.lo, state.space.hi);
  return {next, next.currentTheta};
}

Learner make_learner(const LearnerSpec& spec, const Scenario& s, double eta) {
  switch (spec.kind) {
    case LearnerKind::Ons: return OnsState::init(s);
    case LearnerKind::Ftrl: return FtrlState::init(eta, barrier_for(s));
    case LearnerKind::Oftrl: return OftrlState::init(eta, barrier_for(s), spec.hint);
  }
  throw ConfigError("unknown learner");
}

double current_theta(const Learner& learner) {
  struct Visitor {
    double operator()(const OnsState& s) const { return s.currentTheta; }
    double operator()(const FtrlState& s) const { return s.currentTheta; }
    double operator()(const OftrlState& s) const { return s.base.currentTheta; }
  };
  return std::visit(Visitor{}, learner);
}

double observe(Learner& learner, Payoff g) {
  struct Visitor {
    Payoff g;
    double operator()(OnsState& s) const {
      const double b = grad(g, s.currentTheta);
      s = ons_update(s, g).state;
      return b;
    }
    double operator()(FtrlState& s) const {
      const double b = grad(g, s.currentTheta);
      s = ftrl_update(s, g).state;
      return b;
    }
    double operator()(OftrlState& s) const {
      const double b = grad(g, s.base.currentTheta);
      s = oftrl_update(s, g).state;
      return b;
    }
  };
  return std::visit(Visitor{g}, learner);
}

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Ons: return "ons";
    case LearnerKind::Ftrl: return "ftrl";
    case LearnerKind::Oftrl: return "oftrl";
  }
  return "?";
}

}  // namespace betting
