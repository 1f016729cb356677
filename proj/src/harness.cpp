#include "betting/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <tuple>

#include <omp.h>

#include "betting/error.hpp"
#include <nlohmann/json.hpp>

namespace betting {

namespace {

using Clock = std::chrono::steady_clock;

LearnerKind learner_kind(Method m) {
  switch (m) {
    case Method::Ons: return LearnerKind::Ons;
    case Method::Ftrl: return LearnerKind::Ftrl;
    case Method::Oftrl: return LearnerKind::Oftrl;
    default: break;
  }
  throw ConfigError(to_string(m) + " is not a streaming learner");
}

PortfolioKind portfolio_kind(Method m) {
  if (m == Method::Co96) return PortfolioKind::Co96;
  if (m == Method::Oj23) return PortfolioKind::Oj23;
  throw ConfigError(to_string(m) + " is not a portfolio method");
}

auto record_key(const TrialRecord& r) {
  return std::make_tuple(static_cast<int>(r.method), r.alpha, static_cast<int>(r.hypothesis),
                         r.seedIndex);
}

void sort_records(std::vector<TrialRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return record_key(a) < record_key(b); });
}

TestConfig trial_config(const ExperimentConfig& cfg, Method m, double alpha) {
  TestConfig tc;
  tc.alpha = alpha;
  tc.budget = cfg.budget;
  tc.eta = cfg.eta;
  if (is_streaming(m)) tc.learner = {learner_kind(m), cfg.hint};
  return tc;
}

double elapsed_nanos(Clock::time_point start) {
  return std::chrono::duration<double, std::nano>(Clock::now() - start).count();
}

// One trajectory run to the largest threshold (or the budget), then every
// level's verdict read off it. Matches the per-level engine run exactly.
void run_unit(const ExperimentConfig& cfg, Method m, Hypothesis h, std::size_t k,
              std::span<TrialRecord> out) {
  const double minAlpha = *std::min_element(cfg.alphas.begin(), cfg.alphas.end());
  TestConfig tc = trial_config(cfg, m, minAlpha);
  tc.recordTrajectory = true;
  const StreamSpec& spec = cfg.stream_for(h);
  auto stream = make_stream(spec, stream_seed(cfg.masterSeed, h, k));
  const auto start = Clock::now();
  const TestResult r = run_method(m, *stream, spec.scenario, tc);
  const double perIter =
      cfg.recordTiming && r.rounds > 0 ? elapsed_nanos(start) / static_cast<double>(r.rounds) : 0.0;

  const bool atBudget = !r.streamExhausted && r.rounds >= cfg.budget;
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    const double alpha = cfg.alphas[ai];
    TrialRecord& rec = out[ai];
    rec = {m, alpha, h, k, Verdict::NotRejected, std::nullopt, 0.0, perIter};
    const auto& w = r.wealthTrajectory;
    const auto hit = std::find_if(w.begin(), w.end(), [&](double v) { return ville_reject(v, alpha); });
    if (hit != w.end()) {
      const auto t = static_cast<std::size_t>(hit - w.begin());
      rec.verdict = Verdict::Rejected;
      rec.rejectionTime = t + 1;
      rec.finalLogWealth = r.logWealthTrajectory[t];
      continue;
    }
    rec.finalLogWealth = r.logWealthTrajectory.empty() ? 0.0 : r.logWealthTrajectory.back();
    if (atBudget) {
      Rng rng(verdict_seed(cfg.masterSeed, m, alpha, h, k));
      if (randomized_budget_verdict(r.finalWealth, alpha, rng)) {
        rec.verdict = Verdict::Rejected;
        rec.rejectionTime = cfg.budget;
      }
    }
  }
}

template <class Body>
void parallel_for(std::size_t n, int threads, Body body) {
  std::exception_ptr failure;
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(betting_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return format_double(v);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open output '" + path + "'");
  return f;
}

template <class Writer>
void write_to(const std::string& path, Writer write) {
  if (path == "-" || path.empty()) {
    write(std::cout);
    return;
  }
  auto f = open_output(path);
  write(f);
  f.flush();
  if (!f) throw IoError("write failed for '" + path + "'");
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Ons: return "ons";
    case Method::Ftrl: return "ftrl";
    case Method::Oftrl: return "oftrl";
    case Method::Co96: return "co96";
    case Method::Oj23: return "oj23";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (const Method m : kAllMethods) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  if (list == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Method> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto item = list.substr(0, comma);
    if (!item.empty()) out.push_back(parse_method(item));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

bool is_streaming(Method m) { return m == Method::Ons || m == Method::Ftrl || m == Method::Oftrl; }

TestResult run_method(Method method, PayoffStream& stream, const Scenario& scenario,
                      const TestConfig& config) {
  if (is_streaming(method)) {
    TestConfig tc = config;
    tc.learner.kind = learner_kind(method);
    return run_betting_test(stream, scenario, tc);
  }
  return run_portfolio_test(stream, scenario, portfolio_kind(method), config);
}

std::vector<double> default_alphas() {
  std::vector<double> a(20);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.005 + (0.1 - 0.005) * i / 19.0;
  return a;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("no methods configured");
  if (alphas.empty()) throw ConfigError("no alpha levels configured");
  for (const double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha must lie in (0,1), got " + format_double(a));
  }
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (budget < 1) throw ConfigError("budget must be positive");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (hypotheses.empty()) throw ConfigError("no hypotheses configured");
  for (const Hypothesis h : hypotheses) stream_for(h).validate();
  const bool portfolio = std::any_of(methods.begin(), methods.end(),
                                     [](Method m) { return !is_streaming(m); });
  if (portfolio && h1.scenario.one_sided() && !(h1.scenario.mu0 > 0.0)) {
    throw ConfigError("co96/oj23 need mu0 > 0");
  }
}

std::uint64_t stream_seed(std::uint64_t masterSeed, Hypothesis h, std::size_t k) {
  return derive_seed(derive_seed(masterSeed, h == Hypothesis::H0 ? 0 : 1), k);
}

std::uint64_t verdict_seed(std::uint64_t masterSeed, Method m, double alpha, Hypothesis h,
                           std::size_t k) {
  std::uint64_t s = derive_seed(masterSeed, 0x5eed'0000ULL + static_cast<std::uint64_t>(m));
  s = derive_seed(s, std::bit_cast<std::uint64_t>(alpha));
  s = derive_seed(s, h == Hypothesis::H0 ? 0 : 1);
  return derive_seed(s, k);
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config) {
  config.validate();
  const std::size_t nAlpha = config.alphas.size();
  const std::size_t nHyp = config.hypotheses.size();
  const std::size_t units = config.methods.size() * nHyp * config.runs;
  std::vector<TrialRecord> records(units * nAlpha);
  parallel_for(units, config.threads, [&](std::size_t u) {
    const std::size_t k = u % config.runs;
    const std::size_t h = (u / config.runs) % nHyp;
    const std::size_t m = u / (config.runs * nHyp);
    run_unit(config, config.methods[m], config.hypotheses[h], k,
             std::span<TrialRecord>(records).subspan(u * nAlpha, nAlpha));
  });
  sort_records(records);
  return records;
}

std::vector<TrialRecord> run_trials_reference(const ExperimentConfig& config) {
  config.validate();
  std::vector<TrialRecord> records;
  for (const Method m : config.methods) {
    for (const double alpha : config.alphas) {
      for (const Hypothesis h : config.hypotheses) {
        const StreamSpec& spec = config.stream_for(h);
        for (std::size_t k = 0; k < config.runs; ++k) {
          TestConfig tc = trial_config(config, m, alpha);
          tc.seed = verdict_seed(config.masterSeed, m, alpha, h, k);
          auto stream = make_stream(spec, stream_seed(config.masterSeed, h, k));
          const auto start = Clock::now();
          const TestResult r = run_method(m, *stream, spec.scenario, tc);
          const double perIter = config.recordTiming && r.rounds > 0
                                     ? elapsed_nanos(start) / static_cast<double>(r.rounds)
                                     : 0.0;
          records.push_back({m, alpha, h, k, r.verdict, r.rejectionTime, r.finalLogWealth, perIter});
        }
      }
    }
  }
  sort_records(records);
  return records;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records, std::uint64_t budget) {
  struct Acc {
    double tauSum = 0.0;
    std::size_t h1 = 0, censored = 0, h0 = 0, h0Rejected = 0;
    std::vector<double> nanos;
  };
  std::map<std::pair<int, double>, Acc> groups;
  for (const auto& r : records) {
    Acc& a = groups[{static_cast<int>(r.method), r.alpha}];
    if (r.hypothesis == Hypothesis::H1) {
      ++a.h1;
      if (r.rejectionTime) {
        a.tauSum += static_cast<double>(*r.rejectionTime);
      } else {
        ++a.censored;
        a.tauSum += static_cast<double>(budget);
      }
    } else {
      ++a.h0;
      if (r.verdict == Verdict::Rejected) ++a.h0Rejected;
    }
    a.nanos.push_back(r.perIterNanos);
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, a] : groups) {
    AggregateRow row;
    row.method = static_cast<Method>(key.first);
    row.alpha = key.second;
    row.h1Runs = a.h1;
    row.censoredRuns = a.censored;
    row.meanRejectionTime = a.h1 ? a.tauSum / static_cast<double>(a.h1) : 0.0;
    row.h0Runs = a.h0;
    row.empiricalFPR = a.h0 ? static_cast<double>(a.h0Rejected) / static_cast<double>(a.h0) : 0.0;
    const double n = static_cast<double>(a.nanos.size());
    const double mean = std::accumulate(a.nanos.begin(), a.nanos.end(), 0.0) / n;
    double var = 0.0;
    for (const double v : a.nanos) var += (v - mean) * (v - mean);
    row.meanPerIterNanos = mean;
    row.stdPerIterNanos = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<AggregateRow> alpha_sweep(const ExperimentConfig& config) {
  return aggregate(run_trials(config), config.budget);
}

std::vector<BenchRecord> bench_per_iteration(const ExperimentConfig& config,
                                             const BenchOptions& options) {
  config.h1.validate();
  if (config.methods.empty()) throw ConfigError("no methods to benchmark");
  const bool anyStreaming = std::any_of(config.methods.begin(), config.methods.end(), is_streaming);
  const bool anyPortfolio = !std::all_of(config.methods.begin(), config.methods.end(), is_streaming);
  if (anyStreaming && options.streamingIters < 10000) {
    throw ConfigError("streaming benchmarks need at least 10^4 measured iterations");
  }
  if (anyPortfolio && options.portfolioIters < 100) {
    throw ConfigError("portfolio benchmarks need at least 10^2 measured iterations");
  }
  if (options.batch == 0) throw ConfigError("batch must be positive");

  const std::size_t most =
      options.warmupIters + std::max(anyStreaming ? options.streamingIters : 0,
                                     anyPortfolio ? options.portfolioIters : 0);
  auto stream = make_h1_stream(config.h1, stream_seed(config.masterSeed, Hypothesis::H1, 0));
  const std::vector<Observation> rows = materialize(*stream, most);
  const Scenario& scenario = config.h1.scenario;

  std::vector<BenchRecord> out;
  for (const Method m : config.methods) {
    std::vector<double> samples;
    volatile double sink = 0.0;
    BenchRecord rec;
    rec.method = m;
    rec.historyLength = options.warmupIters;
    if (is_streaming(m)) {
      Learner learner = make_learner({learner_kind(m), config.hint}, scenario, config.eta);
      double logW = 0.0;
      std::size_t i = 0;
      for (; i < options.warmupIters; ++i) {
        logW += std::log1p(-current_theta(learner) * rows[i].payoff.g);
        observe(learner, rows[i].payoff);
      }
      const std::size_t end = options.warmupIters + options.streamingIters;
      while (i < end) {
        const std::size_t stop = std::min(end, i + options.batch);
        const std::size_t n = stop - i;
        const auto start = Clock::now();
        for (; i < stop; ++i) {
          logW += std::log1p(-current_theta(learner) * rows[i].payoff.g);
          observe(learner, rows[i].payoff);
        }
        samples.push_back(elapsed_nanos(start) / static_cast<double>(n));
      }
      rec.iterations = options.streamingIters;
      sink = logW;
    } else {
      HistoryBuffer history(scenario);
      for (std::size_t i = 0; i < options.warmupIters; ++i) history.push(rows[i]);
      double acc = 0.0;
      for (std::size_t i = 0; i < options.portfolioIters; ++i) {
        const auto start = Clock::now();
        history.push(rows[options.warmupIters + i]);
        const PortfolioStat s = m == Method::Co96 ? co96(history) : oj23(history);
        acc += s.logStatistic;
        samples.push_back(elapsed_nanos(start));
      }
      rec.iterations = options.portfolioIters;
      sink = acc;
    }
    (void)sink;
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double var = 0.0;
    for (const double v : samples) var += (v - mean) * (v - mean);
    rec.meanNanos = mean;
    rec.stdNanos = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    out.push_back(rec);
  }
  return out;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + std::string(name) + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "method,alpha,hypothesis,seed_index,verdict,rejection_time,final_log_wealth,"
         "per_iter_nanos\n";
  for (const auto& r : records) {
    out << to_string(r.method) << ',' << format_double(r.alpha) << ',' << to_string(r.hypothesis)
        << ',' << r.seedIndex << ',' << to_string(r.verdict) << ',';
    if (r.rejectionTime) out << *r.rejectionTime;
    out << ',' << format_double(r.finalLogWealth) << ',' << format_double(r.perIterNanos) << '\n';
  }
}

void write_trials_json(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "[\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << "  {\"method\": \"" << to_string(r.method) << "\", \"alpha\": " << json_number(r.alpha)
        << ", \"hypothesis\": \"" << to_string(r.hypothesis) << "\", \"seed_index\": "
        << r.seedIndex << ", \"verdict\": \"" << to_string(r.verdict)
        << "\", \"rejection_time\": ";
    if (r.rejectionTime) {
      out << *r.rejectionTime;
    } else {
      out << "null";
    }
    out << ", \"final_log_wealth\": " << json_number(r.finalLogWealth)
        << ", \"per_iter_nanos\": " << json_number(r.perIterNanos) << '}'
        << (i + 1 < records.size() ? ",\n" : "\n");
  }
  out << "]\n";
}

std::vector<TrialRecord> read_trials_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid trial json: ") + e.what());
  }
  if (!doc.is_array()) throw DataError("trial json must be an array");
  std::vector<TrialRecord> out;
  try {
    for (const auto& j : doc) {
      TrialRecord r;
      r.method = parse_method(j.at("method").get<std::string>());
      r.alpha = j.at("alpha").get<double>();
      r.hypothesis = j.at("hypothesis").get<std::string>() == "H0" ? Hypothesis::H0 : Hypothesis::H1;
      r.seedIndex = j.at("seed_index").get<std::size_t>();
      r.verdict = j.at("verdict").get<std::string>() == "REJECTED" ? Verdict::Rejected
                                                                    : Verdict::NotRejected;
      if (!j.at("rejection_time").is_null()) r.rejectionTime = j["rejection_time"].get<std::uint64_t>();
      r.finalLogWealth = j.at("final_log_wealth").is_null()
                             ? std::nan("")
                             : j["final_log_wealth"].get<double>();
      r.perIterNanos = j.at("per_iter_nanos").get<double>();
      out.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid trial record: ") + e.what());
  }
  return out;
}

void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "method,alpha,mean_rejection_time,h1_runs,censored_runs,empirical_fpr,h0_runs,"
         "mean_per_iter_nanos,std_per_iter_nanos\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << format_double(r.alpha) << ','
        << format_double(r.meanRejectionTime) << ',' << r.h1Runs << ',' << r.censoredRuns << ','
        << format_double(r.empiricalFPR) << ',' << r.h0Runs << ','
        << format_double(r.meanPerIterNanos) << ',' << format_double(r.stdPerIterNanos) << '\n';
  }
}

void write_aggregates_json(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "  {\"method\": \"" << to_string(r.method) << "\", \"alpha\": " << json_number(r.alpha)
        << ", \"mean_rejection_time\": " << json_number(r.meanRejectionTime)
        << ", \"h1_runs\": " << r.h1Runs << ", \"censored_runs\": " << r.censoredRuns
        << ", \"empirical_fpr\": " << json_number(r.empiricalFPR) << ", \"h0_runs\": " << r.h0Runs
        << ", \"mean_per_iter_nanos\": " << json_number(r.meanPerIterNanos)
        << ", \"std_per_iter_nanos\": " << json_number(r.stdPerIterNanos) << '}'
        << (i + 1 < rows.size() ? ",\n" : "\n");
  }
  out << "]\n";
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
  out << "method,history_length,iterations,mean_ms,std_ms\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.historyLength << ',' << r.iterations << ','
        << format_double(r.meanNanos * 1e-6) << ',' << format_double(r.stdNanos * 1e-6) << '\n';
  }
}

void emit(const std::vector<TrialRecord>& records, OutputFormat format, const std::string& path) {
  if (records.empty()) throw ConfigError("nothing to emit");
  write_to(path, [&](std::ostream& o) {
    format == OutputFormat::Csv ? write_trials_csv(o, records) : write_trials_json(o, records);
  });
}

void emit(const std::vector<AggregateRow>& rows, OutputFormat format, const std::string& path) {
  if (rows.empty()) throw ConfigError("nothing to emit");
  write_to(path, [&](std::ostream& o) {
    format == OutputFormat::Csv ? write_aggregates_csv(o, rows) : write_aggregates_json(o, rows);
  });
}

}  // namespace betting
