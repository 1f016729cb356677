#include <benchmark/benchmark.h>

#include "betting/harness.hpp"

using namespace betting;

namespace {

ExperimentConfig easy_config(std::size_t runs) {
  ExperimentConfig cfg;
  cfg.methods = {Method::Ons, Method::Ftrl, Method::Oftrl};
  const Scenario s = Scenario::difference_in_means();
  cfg.h1 = {s, Hypothesis::H1, Uniform{0.2, 0.8}, Uniform{0.3, 0.9}};
  cfg.h0 = cfg.h1;
  cfg.h0.hypothesis = Hypothesis::H0;
  cfg.runs = runs;
  cfg.masterSeed = 11;
  return cfg;
}

void BM_RunTrialsParallel(benchmark::State& state) {
  const auto cfg = easy_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(cfg));
}

void BM_RunTrialsReference(benchmark::State& state) {
  const auto cfg = easy_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_trials_reference(cfg));
}

// One betting round per method at history length 500.
void BM_Round(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  ExperimentConfig cfg = easy_config(1);
  cfg.methods = {method};
  BenchOptions opt;
  opt.streamingIters = 10000;
  opt.portfolioIters = 100;
  for (auto _ : state) {
    const auto rows = bench_per_iteration(cfg, opt);
    state.counters["ns_per_round"] = rows.front().meanNanos;
  }
  state.SetLabel(to_string(method));
}

}  // namespace

BENCHMARK(BM_RunTrialsParallel)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunTrialsReference)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Round)->DenseRange(0, 4)->Iterations(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
