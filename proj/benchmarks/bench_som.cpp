#include <benchmark/benchmark.h>

#include "gridsec/som_diff.hpp"
#include "gridsec/som_solver.hpp"

using namespace gridsec::som;

static void BM_SolveReference(benchmark::State& state) {
  const auto segs = load_segments(GRIDSEC_DATA_DIR "/som/reference");
  const auto cs = generate_constraints(segs);
  for (auto _ : state) benchmark::DoNotOptimize(solve_arrangement(segs, cs, 3));
}
BENCHMARK(BM_SolveReference);

// No markers at all: the search visits every permutation up to the cap.
static void BM_SolveUnconstrained(benchmark::State& state) {
  std::vector<SegmentDescriptor> segs;
  for (int i = 0; i < 9; ++i) segs.push_back({"s" + std::to_string(i), {}, {}});
  SolveOptions opt;
  opt.max_solutions = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_arrangement(segs, {}, 3, opt));
}
BENCHMARK(BM_SolveUnconstrained)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_DiffScenario3B(benchmark::State& state) {
  const auto ref = load_segments(GRIDSEC_DATA_DIR "/som/reference");
  const auto grid = load_arrangement(GRIDSEC_DATA_DIR "/som/reference_arrangement.json");
  const auto cand = load_segments(GRIDSEC_DATA_DIR "/som/scenario_3b");
  for (auto _ : state) benchmark::DoNotOptimize(diff_against_reference(ref, grid, cand));
}
BENCHMARK(BM_DiffScenario3B);
