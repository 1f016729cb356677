#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "betting/baselines.hpp"
#include "betting/datagen.hpp"
#include "betting/engine.hpp"

namespace betting {

enum class Method { Ons, Ftrl, Oftrl, Co96, Oj23 };

inline constexpr Method kAllMethods[] = {Method::Ons, Method::Ftrl, Method::Oftrl, Method::Co96,
                                         Method::Oj23};

std::string to_string(Method m);
Method parse_method(std::string_view name);
/// Comma-separated list; "all" expands to every method.
std::vector<Method> parse_methods(std::string_view list);
bool is_streaming(Method m);

/// Runs one test of any method on `stream`.
TestResult run_method(Method method, PayoffStream& stream, const Scenario& scenario,
                      const TestConfig& config);

/// 20 evenly spaced levels over [0.005, 0.1].
std::vector<double> default_alphas();

struct ExperimentConfig {
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  StreamSpec h1;
  StreamSpec h0;
  std::vector<Hypothesis> hypotheses{Hypothesis::H0, Hypothesis::H1};
  std::vector<double> alphas = default_alphas();
  std::size_t runs = 300;
  std::uint64_t budget = 500;
  std::uint64_t masterSeed = 0;
  double eta = 1.0;
  HintPolicy hint = HintPolicy::LastGradient;
  bool recordTiming = false;  // off keeps records byte-reproducible
  int threads = 0;            // 0 = OpenMP default

  void validate() const;
  const StreamSpec& stream_for(Hypothesis h) const { return h == Hypothesis::H0 ? h0 : h1; }
};

struct TrialRecord {
  Method method = Method::Ftrl;
  double alpha = 0.05;
  Hypothesis hypothesis = Hypothesis::H1;
  std::size_t seedIndex = 0;
  Verdict verdict = Verdict::NotRejected;
  std::optional<std::uint64_t> rejectionTime;  // empty = censored at budget
  double finalLogWealth = 0.0;
  double perIterNanos = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

/// Seed of the data stream of trial k; shared by every method and level so
/// comparisons are paired.
std::uint64_t stream_seed(std::uint64_t masterSeed, Hypothesis h, std::size_t k);
/// Seed of the randomized Ville draw of one (method, level, trial).
std::uint64_t verdict_seed(std::uint64_t masterSeed, Method m, double alpha, Hypothesis h,
                           std::size_t k);

/// Every (method, alpha, hypothesis, trial). Trials share one trajectory
/// across all levels and run concurrently under OpenMP; records come back
/// sorted by (method, alpha, hypothesis, seedIndex) regardless of schedule.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config);

/// Serial reference: one independent engine run per record.
std::vector<TrialRecord> run_trials_reference(const ExperimentConfig& config);

struct AggregateRow {
  Method method = Method::Ftrl;
  double alpha = 0.05;
  double meanRejectionTime = 0.0;  // H1; censored runs count as budget
  std::size_t h1Runs = 0;
  std::size_t censoredRuns = 0;
  double empiricalFPR = 0.0;  // H0
  std::size_t h0Runs = 0;
  double meanPerIterNanos = 0.0;
  double stdPerIterNanos = 0.0;

  bool operator==(const AggregateRow&) const = default;
};

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records,
                                    std::uint64_t budget);
std::vector<AggregateRow> alpha_sweep(const ExperimentConfig& config);

struct BenchOptions {
  std::size_t warmupIters = 500;
  std::size_t streamingIters = 100000;
  std::size_t portfolioIters = 200;
  std::size_t batch = 256;  // streaming rounds per clock read
};

struct BenchRecord {
  Method method = Method::Ftrl;
  std::size_t iterations = 0;
  std::size_t historyLength = 0;
  double meanNanos = 0.0;
  double stdNanos = 0.0;
};

/// Wall-clock cost of one betting round per method on a pre-materialized H1
/// stream; warmup rounds excluded. Portfolio methods start timing at history
/// length warmupIters.
std::vector<BenchRecord> bench_per_iteration(const ExperimentConfig& config,
                                             const BenchOptions& options);

enum class OutputFormat { Csv, Json };

OutputFormat parse_output_format(std::string_view name);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_trials_json(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trials_json(std::istream& in);
void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_aggregates_json(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows);

/// Writes to `path` ("-" for stdout). Throws IoError with the path on failure
/// and ConfigError for empty results.
void emit(const std::vector<TrialRecord>& records, OutputFormat format, const std::string& path);
void emit(const std::vector<AggregateRow>& rows, OutputFormat format, const std::string& path);

/// %.17g
std::string format_double(double v);

}  // namespace betting
