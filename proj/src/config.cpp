#include "betting/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "betting/error.hpp"

namespace betting {

namespace {

namespace pt = boost::property_tree;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("bad number '" + std::string(s) + "' for " + std::string(what));
  }
  return v;
}

std::uint64_t to_uint(std::string_view s, std::string_view what) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("bad integer '" + std::string(s) + "' for " + std::string(what));
  }
  return v;
}

// Drops '#' comments (outside quotes) and surrounding quotes on values so the
// TOML-style subset reads as plain ini.
std::string normalize(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    bool quoted = false;
    std::string kept;
    for (const char c : line) {
      if (c == '"') {
        quoted = !quoted;
        continue;
      }
      if (c == '#' && !quoted) break;
      kept.push_back(c);
    }
    out << trim(kept) << '\n';
  }
  return out.str();
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '/'))) {
    return std::string(trim(*v));
  }
  return std::nullopt;
}

void check_keys(const pt::ptree& tree, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, child] : tree) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "'" + where);
  }
}

}  // namespace

std::vector<double> parse_alphas(std::string_view text) {
  text = trim(text);
  std::vector<double> out;
  if (text.starts_with("linspace:")) {
    text.remove_prefix(9);
    std::vector<std::string_view> parts;
    while (true) {
      const auto comma = text.find(',');
      parts.push_back(text.substr(0, comma));
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
    if (parts.size() != 3) throw ConfigError("linspace needs lo,hi,n");
    const double lo = to_double(parts[0], "alphas");
    const double hi = to_double(parts[1], "alphas");
    const auto n = to_uint(parts[2], "alphas");
    if (n == 0) throw ConfigError("linspace needs n >= 1");
    for (std::uint64_t i = 0; i < n; ++i) {
      out.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  } else {
    while (!text.empty()) {
      const auto comma = text.find(',');
      out.push_back(to_double(text.substr(0, comma), "alphas"));
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
  }
  if (out.empty()) throw ConfigError("empty alpha list");
  for (const double a : out) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha must lie in (0,1), got " + format_double(a));
  }
  return out;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  std::istringstream text(normalize(in));
  pt::ptree tree;
  try {
    pt::read_ini(text, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  check_keys(tree,
             {"scenario", "mu0", "methods", "alphas", "runs", "budget", "master_seed", "eta",
              "calibration_length", "hint", "hypotheses", "h1", "h0"},
             "");
  for (const char* section : {"h1", "h0"}) {
    if (const auto child = tree.get_child_optional(section)) {
      check_keys(*child, {"dist_x", "dist_y"}, std::string(" in [") + section + "]");
    }
  }

  ExperimentConfig cfg;
  std::optional<double> mu0;
  if (auto v = get(tree, "mu0")) mu0 = to_double(*v, "mu0");
  const Scenario scenario = parse_scenario(get(tree, "scenario").value_or("diff-means"), mu0);

  if (auto v = get(tree, "methods")) cfg.methods = parse_methods(*v);
  if (auto v = get(tree, "alphas")) cfg.alphas = parse_alphas(*v);
  if (auto v = get(tree, "runs")) cfg.runs = to_uint(*v, "runs");
  if (auto v = get(tree, "budget")) cfg.budget = to_uint(*v, "budget");
  if (auto v = get(tree, "master_seed")) cfg.masterSeed = to_uint(*v, "master_seed");
  if (auto v = get(tree, "eta")) cfg.eta = to_double(*v, "eta");
  if (auto v = get(tree, "hint")) {
    if (*v == "last") {
      cfg.hint = HintPolicy::LastGradient;
    } else if (*v == "zero") {
      cfg.hint = HintPolicy::Zero;
    } else {
      throw ConfigError("hint must be 'last' or 'zero'");
    }
  }
  if (auto v = get(tree, "hypotheses")) {
    if (*v == "both") {
      cfg.hypotheses = {Hypothesis::H0, Hypothesis::H1};
    } else if (*v == "H0" || *v == "h0") {
      cfg.hypotheses = {Hypothesis::H0};
    } else if (*v == "H1" || *v == "h1") {
      cfg.hypotheses = {Hypothesis::H1};
    } else {
      throw ConfigError("hypotheses must be H0, H1 or both");
    }
  }
  std::size_t calibration = kDefaultCalibrationLength;
  if (auto v = get(tree, "calibration_length")) calibration = to_uint(*v, "calibration_length");

  const auto h1x = get(tree, "h1/dist_x");
  if (!h1x) throw ConfigError("config needs [h1] dist_x");
  cfg.h1 = {scenario, Hypothesis::H1, parse_distribution(*h1x), std::nullopt, calibration};
  if (auto y = get(tree, "h1/dist_y")) cfg.h1.distY = parse_distribution(*y);

  cfg.h0 = cfg.h1;
  cfg.h0.hypothesis = Hypothesis::H0;
  if (auto x = get(tree, "h0/dist_x")) cfg.h0.distX = parse_distribution(*x);
  if (auto y = get(tree, "h0/dist_y")) cfg.h0.distY = parse_distribution(*y);
  if (scenario.one_sided() && !get(tree, "h0/dist_x")) {
    // No null distribution given: only the H1 stream is meaningful.
    cfg.hypotheses.erase(std::remove(cfg.hypotheses.begin(), cfg.hypotheses.end(), Hypothesis::H0),
                         cfg.hypotheses.end());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path + "'");
  try {
    return parse_experiment_config(f);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace betting
