#include "betting/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "betting/engine.hpp"
#include "betting/error.hpp"

namespace betting {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Node {
  double x;
  double weight;
};

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

template <class Density>
std::vector<Node> composite_rule(double lo, double hi, std::size_t nodesPerUnit, Density density) {
  const std::size_t panels = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(nodesPerUnit * (hi - lo) / kGlNodes.size())));
  const double h = (hi - lo) / static_cast<double>(panels);
  std::vector<Node> out;
  out.reserve(panels * kGlNodes.size());
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = lo + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double x = mid + 0.5 * h * kGlNodes[i];
      const double w = 0.5 * h * kGlWeights[i] * density(x);
      out.push_back({x, w});
      total += w;
    }
  }
  for (auto& n : out) n.weight /= total;
  return out;
}

std::vector<Node> sample_law(const DistributionSpec& d, std::size_t nodesPerUnit) {
  validate(d);
  return std::visit(
      Overloaded{
          [&](const Uniform& u) {
            return composite_rule(u.a, u.b, nodesPerUnit, [](double) { return 1.0; });
          },
          [&](const TruncNormal& t) {
            const boost::math::normal_distribution<double> n(t.mu, t.sigma);
            return composite_rule(t.lo, t.hi, nodesPerUnit,
                                  [&](double x) { return boost::math::pdf(n, x); });
          },
          [&](const Bernoulli& b) {
            std::vector<Node> out;
            if (b.p < 1.0) out.push_back({0.0, 1.0 - b.p});
            if (b.p > 0.0) out.push_back({1.0, b.p});
            return out;
          },
      },
      d);
}

double golden_max(const auto& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RegretTrace regret_trace(std::span<const double> thetas, std::span<const double> payoffs,
                         double comparator) {
  if (thetas.size() != payoffs.size()) throw ConfigError("regret_trace: misaligned sequences");
  for (const double g : payoffs) {
    if (!(1.0 - g * comparator > 0.0)) {
      throw ConfigError("regret_trace: comparator " + std::to_string(comparator) +
                        " is infeasible for payoff " + std::to_string(g));
    }
  }
  RegretTrace r;
  const std::size_t n = thetas.size();
  r.perRoundLoss.resize(n);
  r.comparatorLoss.resize(n);
  r.cumulativeRegret.resize(n);
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    r.perRoundLoss[t] = loss({payoffs[t]}, thetas[t]);
    r.comparatorLoss[t] = loss({payoffs[t]}, comparator);
    acc += r.perRoundLoss[t] - r.comparatorLoss[t];
    r.cumulativeRegret[t] = acc;
  }
  return r;
}

Comparator feasible_comparator(std::span<const double> payoffs, double theta) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const double g : payoffs) {
    if (g > 0.0) hi = std::min(hi, 1.0 / g);
    if (g < 0.0) lo = std::max(lo, 1.0 / g);
  }
  if (theta >= hi) return {hi - 1e-9, true};
  if (theta <= lo) return {lo + 1e-9, true};
  return {theta, false};
}

double best_fixed_empirical(std::span<const double> payoffs, DecisionSpace space) {
  const double mid = std::clamp(0.0, space.lo, space.hi);
  return maximize_log_wealth(payoffs, space, mid).thetaMax;
}

double best_fixed_empirical(const HistoryBuffer& history, DecisionSpace space) {
  return best_fixed_empirical(history.payoffs(), space);
}

std::vector<PayoffAtom> payoff_law(const StreamSpec& spec, std::size_t nodesPerUnit) {
  spec.validate();
  const auto xs = sample_law(spec.distX, nodesPerUnit);
  std::vector<PayoffAtom> law;
  if (spec.scenario.one_sided()) {
    for (const auto& n : xs) law.push_back({spec.scenario.mu0 - n.x, n.weight});
    return law;
  }
  const auto ys = sample_law(*spec.distY, nodesPerUnit);
  law.reserve(xs.size() * ys.size());
  for (const auto& nx : xs) {
    for (const auto& ny : ys) law.push_back({nx.x - ny.x, nx.weight * ny.weight});
  }
  return law;
}

double expected_log_growth(std::span<const PayoffAtom> law, double theta) {
  double v = 0.0;
  for (const auto& a : law) {
    if (a.weight > 0.0) v += a.weight * std::log1p(-a.g * theta);
  }
  return v;
}

OracleResult theta_star_oracle(std::span<const PayoffAtom> law, DecisionSpace space,
                               double gridResolution) {
  if (law.empty()) throw ConfigError("theta_star_oracle: empty payoff law");
  if (!(gridResolution > 0.0)) throw ConfigError("grid resolution must be positive");
  std::vector<double> support;
  for (const auto& a : law) {
    if (a.weight > 0.0) support.push_back(a.g);
  }
  const DecisionSpace f = feasible_interval(support, space);
  const auto value = [&](double th) { return expected_log_growth(law, th); };

  const auto steps = static_cast<std::size_t>(std::ceil((f.hi - f.lo) / gridResolution));
  std::size_t best = 0;
  double bestValue = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= steps; ++i) {
    const double th = i == steps ? f.hi : f.lo + static_cast<double>(i) * gridResolution;
    const double v = value(th);
    if (v > bestValue) {
      bestValue = v;
      best = i;
    }
  }
  const auto at = [&](std::size_t i) {
    return i >= steps ? f.hi : f.lo + static_cast<double>(i) * gridResolution;
  };
  const double lo = best == 0 ? f.lo : at(best - 1);
  const double hi = at(best + 1);
  double theta = golden_max(value, lo, hi, 1e-12);
  double v = value(theta);
  // Boundary optima: golden-section stops short of an endpoint.
  for (const double edge : {f.lo, f.hi}) {
    const double ve = value(edge);
    if (ve > v) {
      v = ve;
      theta = edge;
    }
  }
  return {theta, v};
}

OracleResult theta_star_oracle(const StreamSpec& spec, double gridResolution) {
  const auto law = payoff_law(spec);
  return theta_star_oracle(law, barrier_space(spec.scenario), gridResolution);
}

GrowthFit growth_fit(std::span<const double> cumGrads) {
  const std::size_t n = cumGrads.size();
  if (n == 0) return {};
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale = std::max(scale, std::abs(cumGrads[i]) / static_cast<double>(i + 1));
  }
  if (!(scale > 0.0)) return {};
  constexpr int kGrid = 200;
  const std::size_t maxT0 = (n + 1) / 2;
  for (int k = kGrid - 1; k >= 0; --k) {
    const double c = scale * std::pow(10.0, -3.0 + 3.0 * k / (kGrid - 1));
    if (c < 1e-3) break;
    // Smallest t0 with |G_t| >= c t for all t >= t0.
    std::size_t t0 = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i + 1);
      if (std::abs(cumGrads[i]) < c * t * (1.0 - 1e-12)) t0 = i + 2;
    }
    if (t0 <= maxT0) return {t0, c, true};
  }
  return {};
}

double lemma6_audit(std::span<const double> thetas, std::span<const double> payoffs, double eta,
                    BarrierKind kind) {
  if (thetas.size() != payoffs.size()) throw ConfigError("lemma6_audit: misaligned sequences");
  double worst = 0.0;
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    worst = std::max(worst, eta * std::sqrt(dual_norm_sq({payoffs[t]}, thetas[t], kind)));
  }
  return worst;
}

double rejection_lower_reference(double alpha, double omegaStar) {
  if (!(omegaStar > 0.0)) throw ConfigError("reference rejection time needs omega* > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  return std::log(1.0 / alpha) / omegaStar;
}

LearnerTrace trace_learner(PayoffStream& stream, const Scenario& scenario,
                           const LearnerSpec& spec, double eta, std::size_t rounds) {
  Learner learner = make_learner(spec, scenario, eta);
  LearnerTrace tr;
  tr.thetas.reserve(rounds);
  tr.payoffs.reserve(rounds);
  tr.cumGrads.reserve(rounds);
  WealthState w;
  double g = 0.0;
  for (std::size_t t = 0; t < rounds; ++t) {
    const auto obs = stream.next();
    if (!obs) break;
    const double theta = current_theta(learner);
    w = wealth_step(w, theta, obs->payoff);
    tr.thetas.push_back(theta);
    tr.payoffs.push_back(obs->payoff.g);
    g += observe(learner, obs->payoff);
    tr.cumGrads.push_back(g);
  }
  tr.logWealth = w.logWealth;
  return tr;
}

}  // namespace betting
