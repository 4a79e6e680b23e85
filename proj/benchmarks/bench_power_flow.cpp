#include <benchmark/benchmark.h>

#include "gridsec/grid_model.hpp"
#include "gridsec/power_flow.hpp"

using namespace gridsec;

static void BM_NewtonRaphson(benchmark::State& state) {
  const NetworkModel m = build_ieee14();
  const TopologyMatrix t = topology_from_breakers(m);
  PowerFlowOptions opt;
  opt.enforce_q_limits = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve(m, t, opt));
  state.SetLabel(opt.enforce_q_limits ? "q limits" : "no q limits");
}
BENCHMARK(BM_NewtonRaphson)->Arg(0)->Arg(1);
