#include "betting/cli.hpp"

#include <algorithm>
#include <iostream>
#include <fstream>
#include <optional>

#include "CLI11.hpp"

#include "betting/analysis.hpp"
#include "betting/config.hpp"
#include "betting/error.hpp"
#include "betting/harness.hpp"

namespace betting {

namespace {

constexpr const char* kVersion = "betting 0.1.0";

// Easy setting: disjoint supports.
constexpr const char* kDefaultDistX = "uniform:0.2,0.4";
constexpr const char* kDefaultDistY = "uniform:0.7,0.9";

struct StreamFlags {
  std::string scenario = "diff-means";
  std::optional<double> mu0;
  std::string distX;
  std::string distY;
  CLI::Option* scenarioOpt = nullptr;
  CLI::Option* mu0Opt = nullptr;
  CLI::Option* distXOpt = nullptr;
  CLI::Option* distYOpt = nullptr;

  void add(CLI::App& app, bool withDistributions = true) {
    scenarioOpt = app.add_option("--scenario", scenario, "diff-means or one-sided")
                      ->check(CLI::IsMember({"diff-means", "difference-in-means", "one-sided"}));
    mu0Opt = app.add_option("--mu0", mu0, "null mean bound for one-sided testing");
    if (!withDistributions) return;
    distXOpt = app.add_option("--dist-x", distX,
                              "x distribution: uniform:a,b | truncnormal:mu,sigma[,lo,hi] | "
                              "bernoulli:p (diff-means default " +
                                  std::string(kDefaultDistX) + ")");
    distYOpt = app.add_option("--dist-y", distY,
                              "y distribution (diff-means; default " + std::string(kDefaultDistY) +
                                  ")");
  }

  Scenario parsed_scenario() const { return parse_scenario(scenario, mu0); }

  StreamSpec h1_spec(std::size_t calibration) const {
    const Scenario s = parsed_scenario();
    StreamSpec spec{s, Hypothesis::H1, Uniform{}, std::nullopt, calibration};
    if (s.one_sided()) {
      if (distX.empty()) throw ConfigError("one-sided scenarios need --dist-x");
      spec.distX = parse_distribution(distX);
      if (!distY.empty()) throw ConfigError("--dist-y applies to diff-means only");
    } else {
      spec.distX = parse_distribution(distX.empty() ? kDefaultDistX : distX);
      spec.distY = parse_distribution(distY.empty() ? kDefaultDistY : distY);
    }
    return spec;
  }
};

struct ExperimentFlags {
  StreamFlags stream;
  std::string config;
  std::string methods;
  std::string alphas;
  std::string h0DistX;
  std::string h0DistY;
  std::string hypothesis;
  std::string hint = "last";
  std::size_t runs = 300;
  std::uint64_t budget = 500;
  std::uint64_t seed = 0;
  double eta = 1.0;
  std::size_t calibration = kDefaultCalibrationLength;
  int threads = 0;
  bool timing = false;
  std::string out = "-";
  std::string format = "csv";
  std::vector<CLI::Option*> opts;

  void add(CLI::App& app, const std::string& defaultMethods, const std::string& defaultAlphas,
           const std::string& defaultHypothesis) {
    methods = defaultMethods;
    alphas = defaultAlphas;
    hypothesis = defaultHypothesis;
    app.add_option("--config", config, "experiment file; flags given explicitly override it")
        ->check(CLI::ExistingFile);
    stream.add(app);
    opts = {
        app.add_option("--method,--methods", methods,
                       "comma-separated subset of ons,ftrl,oftrl,co96,oj23, or all"),
        app.add_option("--alpha,--alphas", alphas, "levels: a,b,c or linspace:lo,hi,n"),
        app.add_option("--runs", runs, "trials per hypothesis")->check(CLI::PositiveNumber),
        app.add_option("--budget", budget, "rounds per trial")->check(CLI::PositiveNumber),
        app.add_option("--seed", seed, "master seed"),
        app.add_option("--eta", eta, "FTRL/OFTRL learning rate"),
        app.add_option("--hint", hint, "OFTRL hint: last or zero")
            ->check(CLI::IsMember({"last", "zero"})),
        app.add_option("--h0-dist-x", h0DistX, "null x distribution (one-sided H0 runs)"),
        app.add_option("--h0-dist-y", h0DistY, "null y distribution before shifting (diff-means)"),
        app.add_option("--hypothesis", hypothesis, "H0, H1 or both")
            ->check(CLI::IsMember({"H0", "H1", "both"})),
        app.add_option("--calibration-length", calibration, "H0 shift calibration window")
            ->check(CLI::PositiveNumber),
    };
    app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
    app.add_flag("--timing", timing, "record per-iteration wall-clock time");
    app.add_option("--out", out, "output path, - for stdout");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }

  bool given(const CLI::Option* o) const { return o && o->count() > 0; }

  std::vector<Hypothesis> parsed_hypotheses() const {
    if (hypothesis == "H0") return {Hypothesis::H0};
    if (hypothesis == "H1") return {Hypothesis::H1};
    return {Hypothesis::H0, Hypothesis::H1};
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    const bool fromFile = !config.empty();
    if (fromFile) cfg = load_experiment_config(config);
    const auto use = [&](std::size_t i) { return !fromFile || given(opts[i]); };

    if (use(0)) cfg.methods = parse_methods(methods);
    if (use(1)) cfg.alphas = parse_alphas(alphas);
    if (use(2)) cfg.runs = runs;
    if (use(3)) cfg.budget = budget;
    if (use(4)) cfg.masterSeed = seed;
    if (use(5)) cfg.eta = eta;
    if (use(6)) cfg.hint = hint == "zero" ? HintPolicy::Zero : HintPolicy::LastGradient;
    if (use(9)) cfg.hypotheses = parsed_hypotheses();

    const bool streamFlags = given(stream.scenarioOpt) || given(stream.mu0Opt) ||
                             given(stream.distXOpt) || given(stream.distYOpt) || given(opts[7]) ||
                             given(opts[8]) || given(opts[10]);
    if (!fromFile || streamFlags) {
      std::size_t calibration = cfg.h1.calibrationLength;
      if (use(10)) calibration = this->calibration;
      StreamFlags sf = stream;
      if (fromFile) {
        // Fill unspecified stream flags from the file.
        if (!given(stream.scenarioOpt)) sf.scenario = cfg.h1.scenario.one_sided() ? "one-sided" : "diff-means";
        if (!given(stream.mu0Opt) && cfg.h1.scenario.one_sided()) sf.mu0 = cfg.h1.scenario.mu0;
        if (!given(stream.distXOpt)) sf.distX = to_string(cfg.h1.distX);
        if (!given(stream.distYOpt) && cfg.h1.distY && !sf.parsed_scenario().one_sided()) {
          sf.distY = to_string(*cfg.h1.distY);
        }
      }
      const StreamSpec previousH0 = cfg.h0;
      cfg.h1 = sf.h1_spec(calibration);
      cfg.h0 = cfg.h1;
      cfg.h0.hypothesis = Hypothesis::H0;
      if (fromFile && !given(stream.scenarioOpt) && !given(stream.mu0Opt)) {
        cfg.h0.distX = previousH0.distX;
        if (!cfg.h0.scenario.one_sided()) cfg.h0.distY = previousH0.distY;
      }
      if (!h0DistX.empty()) cfg.h0.distX = parse_distribution(h0DistX);
      if (!h0DistY.empty()) {
        if (cfg.h0.scenario.one_sided()) throw ConfigError("--h0-dist-y applies to diff-means only");
        cfg.h0.distY = parse_distribution(h0DistY);
      }
      const bool h0Wanted =
          std::find(cfg.hypotheses.begin(), cfg.hypotheses.end(), Hypothesis::H0) !=
          cfg.hypotheses.end();
      const bool h0Known = !cfg.h1.scenario.one_sided() || !h0DistX.empty() ||
                           (fromFile && !given(stream.scenarioOpt) && !given(stream.mu0Opt) &&
                            !given(stream.distXOpt));
      if (h0Wanted && !h0Known) {
        throw ConfigError("one-sided H0 runs need --h0-dist-x (or pass --hypothesis H1)");
      }
    }
    cfg.threads = threads;
    cfg.recordTiming = timing;
    cfg.validate();
    return cfg;
  }
};

template <class Rows>
void write_rows(const Rows& rows, OutputFormat format, const std::string& path, std::ostream& out) {
  if (path != "-") {
    emit(rows, format, path);
    return;
  }
  if (rows.empty()) throw ConfigError("nothing to emit");
  if constexpr (std::is_same_v<Rows, std::vector<TrialRecord>>) {
    format == OutputFormat::Csv ? write_trials_csv(out, rows) : write_trials_json(out, rows);
  } else {
    format == OutputFormat::Csv ? write_aggregates_csv(out, rows) : write_aggregates_json(out, rows);
  }
}

int run_simulate(const ExperimentFlags& f, std::ostream& out) {
  const ExperimentConfig cfg = f.build();
  write_rows(run_trials(cfg), parse_output_format(f.format), f.out, out);
  return kExitOk;
}

int run_sweep(const ExperimentFlags& f, std::ostream& out) {
  const ExperimentConfig cfg = f.build();
  write_rows(alpha_sweep(cfg), parse_output_format(f.format), f.out, out);
  return kExitOk;
}

struct TestFlags {
  StreamFlags stream;
  std::string input;
  std::string format = "csv";
  std::string method = "ftrl";
  std::string hint = "last";
  double alpha = 0.05;
  std::optional<std::uint64_t> budget;
  double eta = 1.0;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    app.add_option("--input", input, "sample file (csv: x[,y]; jsonl: {\"x\":..,\"y\":..}), - for stdin")
        ->required();
    app.add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    stream.add(app, false);
    app.add_option("--method", method, "ons, ftrl, oftrl, co96 or oj23");
    app.add_option("--alpha", alpha, "level in (0,1)");
    app.add_option("--budget", budget, "stop after this many rounds (randomized Ville verdict)");
    app.add_option("--eta", eta, "FTRL/OFTRL learning rate");
    app.add_option("--hint", hint, "OFTRL hint: last or zero")->check(CLI::IsMember({"last", "zero"}));
    app.add_option("--seed", seed, "seed of the randomized budget verdict");
  }
};

int run_test(const TestFlags& f, std::ostream& out) {
  const Method method = parse_method(f.method);
  const Scenario scenario = f.stream.parsed_scenario();
  TestConfig tc;
  tc.alpha = f.alpha;
  tc.budget = f.budget;
  tc.eta = f.eta;
  tc.seed = f.seed;
  tc.learner.hint = f.hint == "zero" ? HintPolicy::Zero : HintPolicy::LastGradient;
  tc.validate();
  if (!is_streaming(method)) HistoryBuffer{scenario};  // surfaces mu0 problems up front
  auto stream = open_stream(f.input, parse_stream_format(f.format), scenario);
  const TestResult r = run_method(method, *stream, scenario, tc);
  out << "verdict=" << to_string(r.verdict) << " time="
      << (r.rejectionTime ? std::to_string(*r.rejectionTime) : std::string("-"))
      << " final_log_wealth=" << format_double(r.finalLogWealth) << '\n';
  return kExitOk;
}

struct BenchFlags {
  StreamFlags stream;
  std::string methods = "all";
  std::uint64_t seed = 0;
  double eta = 1.0;
  BenchOptions options;
  std::string out = "-";

  void add(CLI::App& app) {
    stream.add(app);
    app.add_option("--method,--methods", methods, "methods to time, or all");
    app.add_option("--seed", seed, "seed of the benchmark stream");
    app.add_option("--eta", eta, "FTRL/OFTRL learning rate");
    app.add_option("--warmup", options.warmupIters, "untimed rounds (also the portfolio history length)");
    app.add_option("--iters", options.streamingIters, "timed rounds for ons/ftrl/oftrl");
    app.add_option("--portfolio-iters", options.portfolioIters, "timed rounds for co96/oj23");
    app.add_option("--out", out, "csv output path, - for stdout");
  }
};

int run_bench(const BenchFlags& f, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.methods = parse_methods(f.methods);
  cfg.h1 = f.stream.h1_spec(kDefaultCalibrationLength);
  cfg.masterSeed = f.seed;
  cfg.eta = f.eta;
  const auto rows = bench_per_iteration(cfg, f.options);
  if (f.out == "-") {
    write_bench_csv(out, rows);
  } else {
    std::ofstream file(f.out);
    if (!file) throw IoError("cannot open output '" + f.out + "'");
    write_bench_csv(file, rows);
    if (!file.flush()) throw IoError("write failed for '" + f.out + "'");
  }
  return kExitOk;
}

struct OracleFlags {
  StreamFlags stream;
  double alpha = 0.05;
  double resolution = 1e-4;

  void add(CLI::App& app) {
    stream.add(app);
    app.add_option("--alpha", alpha, "level for the reference rejection time");
    app.add_option("--resolution", resolution, "grid spacing before refinement");
  }
};

int run_oracle(const OracleFlags& f, std::ostream& out) {
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  const OracleResult r = theta_star_oracle(f.stream.h1_spec(kDefaultCalibrationLength), f.resolution);
  out << "theta_star=" << format_double(r.thetaStar) << " omega_star=" << format_double(r.omegaStar)
      << " reference_time="
      << (r.omegaStar > 0.0 ? format_double(rejection_lower_reference(f.alpha, r.omegaStar))
                            : std::string("-"))
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential hypothesis tests by betting: simulations, sweeps and file-driven tests",
               "betting"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ExperimentFlags simulate, sweep;
  TestFlags test;
  BenchFlags bench;
  OracleFlags oracle;
  simulate.add(*app.add_subcommand("simulate", "repeated trials, one record per trial"), "ftrl",
               "0.05", "H1");
  test.add(*app.add_subcommand("test", "run one test over a sample file"));
  sweep.add(*app.add_subcommand("sweep", "alpha sweep: mean rejection time and false-positive rate"),
            "all", "linspace:0.005,0.1,20", "both");
  bench.add(*app.add_subcommand("bench", "per-iteration runtime per method"));
  oracle.add(*app.add_subcommand("oracle", "optimal fixed bet and expected log growth"));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "simulate") return run_simulate(simulate, out);
    if (name == "sweep") return run_sweep(sweep, out);
    if (name == "test") return run_test(test, out);
    if (name == "bench") return run_bench(bench, out);
    return run_oracle(oracle, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace betting
