#include <benchmark/benchmark.h>

#include "gridsec/records.hpp"
#include "gridsec/stealth_sweep.hpp"

using namespace gridsec;

static void BM_SweepOneBus(benchmark::State& state) {
  const NetworkModel m = build_ieee14();
  const FixtureRecord base = load_record(GRIDSEC_DATA_DIR "/fixtures/sweep_baseline.csv");
  SweepOptions opt;
  opt.n_points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_stealth_range(m, base, 2, opt));
}
BENCHMARK(BM_SweepOneBus)->Arg(60)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_SweepAllBuses(benchmark::State& state) {
  const NetworkModel m = build_ieee14();
  const FixtureRecord base = load_record(GRIDSEC_DATA_DIR "/fixtures/sweep_baseline.csv");
  SweepOptions opt;
  opt.estimator = state.range(0) != 0 ? SweepEstimator::Linearized : SweepEstimator::Ac;
  for (auto _ : state) benchmark::DoNotOptimize(sweep_all_buses(m, base, opt, 1));
  state.SetLabel(state.range(0) != 0 ? "linearized" : "ac");
}
BENCHMARK(BM_SweepAllBuses)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
