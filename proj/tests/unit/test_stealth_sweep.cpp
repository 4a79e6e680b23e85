#include <doctest.h>

#include <sstream>

#include "gridsec/stealth_sweep.hpp"
#include "test_support.hpp"

using namespace gridsec;

TEST_SUITE("stealth_sweep") {

TEST_CASE("ranges respect the NERC band and the grid") {
  const NetworkModel m = build_ieee14();
  const FixtureRecord base = testing::fixture("sweep_baseline.csv");
  SweepOptions opt;
  opt.n_points = 60;
  const std::vector<SweepResult> all = sweep_all_buses(m, base, opt, 1);
  REQUIRE(all.size() == 14);
  for (const SweepResult& r : all) {
    CAPTURE(r.range.bus);
    CHECK(r.points.size() == 60);
    CHECK(r.range.original_v == doctest::Approx(base.bus(r.range.bus).v_pu));
    if (r.range.empty) continue;
    CHECK(r.range.start <= r.range.end);
    CHECK(r.range.start >= opt.nerc_lo);
    CHECK(r.range.end <= opt.nerc_hi);
    CHECK(r.range.width == doctest::Approx(r.range.end - r.range.start));
    for (const SweepPoint& p : r.points) {
      CHECK(p.detected == (p.j_value > opt.threshold));
      const bool in_band = p.attack_vm >= opt.nerc_lo && p.attack_vm <= opt.nerc_hi;
      if (p.detected) {
        CHECK(p.label == "Bad data detected");
      } else {
        CHECK(p.label == (in_band ? "Stealth attack" : "NERC violation"));
      }
    }
  }
}

TEST_CASE("the recorded voltage itself is never detected") {
  const NetworkModel m = build_ieee14();
  const FixtureRecord base = testing::fixture("sweep_baseline.csv");
  SweepOptions opt;
  opt.n_points = 3;
  opt.window_lo = base.bus(4).v_pu;
  opt.window_hi = base.bus(4).v_pu + 1e-9;
  const SweepResult r = sweep_stealth_range(m, base, 4, opt);
  CHECK_FALSE(r.points.front().detected);
  CHECK(r.points.front().j_value < 1e-6);
}

TEST_CASE("a tighter threshold never widens a range") {
  const NetworkModel m = build_ieee14();
  const FixtureRecord base = testing::fixture("sweep_baseline.csv");
  SweepOptions loose;
  loose.n_points = 80;
  SweepOptions tight = loose;
  tight.threshold = loose.threshold / 4.0;
  for (int bus : {2, 4, 14}) {
    const StealthRange a = sweep_stealth_range(m, base, bus, loose).range;
    const StealthRange b = sweep_stealth_range(m, base, bus, tight).range;
    CAPTURE(bus);
    CHECK(b.width <= a.width + 1e-12);
  }
}

TEST_CASE("CSV outputs carry the documented columns") {
  const NetworkModel m = build_ieee14();
  const FixtureRecord base = testing::fixture("sweep_baseline.csv");
  SweepOptions opt;
  opt.n_points = 5;
  const std::vector<SweepResult> r = {sweep_stealth_range(m, base, 2, opt)};
  std::istringstream log(sweep_log_csv(r));
  std::string header;
  std::getline(log, header);
  CHECK(header == "Bus,Attack_Vm,Original_Vm,Detected,Anomaly Detection");
  std::istringstream sum(range_summary_csv(r));
  std::getline(sum, header);
  CHECK(header ==
        "Bus No.,Bus type,Stealth attack_start point,Stealth attack_end point,Stealth attack_width,Original voltage");
}

}
