#include <benchmark/benchmark.h>

#include <random>

#include "gridsec/chi_square.hpp"
#include "gridsec/measurement.hpp"
#include "gridsec/power_flow.hpp"
#include "gridsec/state_estimation.hpp"

using namespace gridsec;

namespace {

StateVector truth_of(const NetworkModel& m) {
  const PowerFlowSolution pf = solve(m, topology_from_breakers(m));
  StateVector x = StateVector::flat(m);
  x.v = pf.v;
  x.theta = pf.theta;
  return x;
}

MeasurementSet noisy(const NetworkModel& m, bool full) {
  const MeasurementSet layout = full ? full_measurement_layout(m) : bus_measurement_layout(m);
  MeasurementSet z = measure(m, topology_from_breakers(m), truth_of(m), layout);
  std::mt19937_64 rng(1);
  add_gaussian_noise(z, rng);
  return z;
}

}  // namespace

static void BM_AcWls(benchmark::State& state) {
  const NetworkModel m = build_ieee14();
  const MeasurementSet z = noisy(m, state.range(0) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(wls_estimate_ac(m, z));
  state.SetLabel(std::to_string(z.size()) + " measurements");
}
BENCHMARK(BM_AcWls)->Arg(0)->Arg(1);

static void BM_DcWls(benchmark::State& state) {
  const NetworkModel m = build_ieee14();
  const DcModel dc = dc_measurement_matrix(m, topology_from_breakers(m));
  const Eigen::VectorXd z = dc.h * Eigen::VectorXd::Constant(dc.h.cols(), 0.1);
  const Eigen::VectorXd sigma = Eigen::VectorXd::Constant(dc.h.rows(), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(wls_estimate_dc(dc.h, z, sigma));
}
BENCHMARK(BM_DcWls);

static void BM_BadDataRemoval(benchmark::State& state) {
  const NetworkModel m = build_ieee14();
  MeasurementSet z = noisy(m, true);
  z.entries[7].value += 20.0 * z.entries[7].sigma;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        iterative_bad_data_removal(m, z, [](int df) { return chi_square_threshold(df, 0.05); }));
  }
}
BENCHMARK(BM_BadDataRemoval);
