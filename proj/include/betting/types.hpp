#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace betting {

enum class ScenarioKind { DifferenceInMeans, OneSided };

/// Which null is being tested. mu0 is meaningful only for OneSided.
struct Scenario {
  ScenarioKind kind = ScenarioKind::DifferenceInMeans;
  double mu0 = 0.0;

  static Scenario difference_in_means() { return {}; }
  static Scenario one_sided(double mu0);

  bool one_sided() const { return kind == ScenarioKind::OneSided; }
};

std::string to_string(const Scenario& s);
Scenario parse_scenario(std::string_view name, std::optional<double> mu0);

/// Per-round outcome g in [-1, 1].
struct Payoff {
  double g = 0.0;
};

/// One round of raw data. y is unused (0) for one-sided streams.
struct Observation {
  double x = 0.0;
  double y = 0.0;
  Payoff payoff;
};

/// Lazy source of observations. nullopt marks end of data.
class PayoffStream {
public:
  virtual ~PayoffStream() = default;
  virtual std::optional<Observation> next() = 0;
};

struct DecisionSpace {
  double lo = -1.0;
  double hi = 1.0;
  bool openInterior = false;

  bool contains(double theta) const {
    return openInterior ? (lo < theta && theta < hi) : (lo <= theta && theta <= hi);
  }
};

/// K = [-1,1] or [0,1]; barrier learners keep iterates strictly inside.
DecisionSpace barrier_space(const Scenario& s);
/// Halved ONS space: [-1/2,1/2] or [0,1/2].
DecisionSpace ons_space(const Scenario& s);
/// Full space for the portfolio maximizer: [-1,1] or [0,1].
DecisionSpace portfolio_space(const Scenario& s);

}  // namespace betting
