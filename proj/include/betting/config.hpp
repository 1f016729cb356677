#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "betting/harness.hpp"

namespace betting {

/// "0.01,0.05,0.1" or "linspace:lo,hi,n".
std::vector<double> parse_alphas(std::string_view text);

/// Key-value experiment file (TOML-style subset: top-level keys plus [h1] and
/// [h0] tables). Keys mirror ExperimentConfig:
///
///   scenario = "diff-means"        # or "one-sided" with mu0 = 0.3
///   methods = "ftrl,oftrl,ons"     # or "all"
///   alphas = "linspace:0.005,0.1,20"
///   runs = 300
///   budget = 500
///   master_seed = 7
///   eta = 1
///   calibration_length = 500
///   [h1]
///   dist_x = "uniform:0.2,0.8"
///   dist_y = "uniform:0.3,0.9"
///   [h0]                           # optional for diff-means (shifted h1)
///   dist_x = "bernoulli:0.29"
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace betting
