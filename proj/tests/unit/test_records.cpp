#include <doctest.h>

#include <random>

#include "gridsec/error.hpp"
#include "gridsec/records.hpp"
#include "test_support.hpp"

using namespace gridsec;

TEST_SUITE("records") {

TEST_CASE("CSV round trip is lossless at 9 significant digits") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  for (int trial = 0; trial < 200; ++trial) {
    FixtureRecord r;
    r.source = "trial" + std::to_string(trial);
    r.origin = trial % 2 ? RecordOrigin::Measurements : RecordOrigin::PostSe;
    if (trial % 3 == 0) r.bdd_chi2 = std::abs(u(rng));
    r.meta["scenario"] = "S05";
    for (int b = 1; b <= 14; ++b) r.buses.push_back({b, 1.0 + u(rng) / 5000.0, u(rng) / 20.0, u(rng), u(rng)});
    r.branches.push_back({2, 4, BreakerState::Open, BreakerState::Closed, u(rng), u(rng), u(rng) / 100.0});
    const FixtureRecord back = record_from_csv(record_to_csv(r));
    CHECK(back.source == r.source);
    CHECK(back.origin == r.origin);
    CHECK(back.meta == r.meta);
    REQUIRE(back.buses.size() == r.buses.size());
    for (std::size_t i = 0; i < r.buses.size(); ++i) {
      CHECK(back.buses[i].v_pu == doctest::Approx(r.buses[i].v_pu).epsilon(1e-9));
      CHECK(back.buses[i].p_mw == doctest::Approx(r.buses[i].p_mw).epsilon(1e-9));
      CHECK(back.buses[i].theta_deg == doctest::Approx(r.buses[i].theta_deg).epsilon(1e-9));
    }
    CHECK(back.branches[0].status_from == BreakerState::Open);
    CHECK(back.branches[0].loss_mw == doctest::Approx(r.branches[0].loss_mw).epsilon(1e-9));
    // A second pass is exact.
    CHECK(record_from_csv(record_to_csv(back)) == back);
  }
}

TEST_CASE("parser rejects malformed records") {
  CHECK_THROWS_AS(record_from_csv(""), ParseError);
  CHECK_THROWS_AS(record_from_csv("[buses]\nbus,v,theta\n"), ParseError);
  CHECK_THROWS_AS(record_from_csv("[buses]\nbus,v_pu,theta_deg,p_mw,q_mvar\n1,x,0,0,0\n"), ParseError);
  CHECK_THROWS_AS(record_from_csv("1,1,0,0,0\n"), ParseError);
  CHECK_THROWS_AS(record_from_csv("# origin: sideways\n[buses]\nbus,v_pu,theta_deg,p_mw,q_mvar\n1,1,0,0,0\n"),
                  ParseError);
  CHECK_THROWS_AS(record_from_csv("[buses]\nbus,v_pu,theta_deg,p_mw,q_mvar\n1,1,0,0,0\n"
                                  "[branches]\nfrom,to,status_from,status_to,p_mw,q_mvar,loss_mw\n"
                                  "1,2,Shut,Closed,0,0,0\n"),
                  ParseError);
  CHECK_THROWS_AS(load_record(testing::data_path("fixtures/missing.csv")), ParseError);
}

TEST_CASE("shipped fixtures parse") {
  for (const char* name : {"sweep_baseline.csv", "s1a_baseline.csv", "s1a_attacked.csv", "s1b_baseline.csv",
                           "s1b_attacked.csv", "postse_baseline.csv", "scenario_2a.csv", "scenario_2b.csv",
                           "scenario_2c.csv", "scenario_2d.csv"}) {
    CAPTURE(name);
    const FixtureRecord r = testing::fixture(name);
    CHECK(r.buses.size() == 14);
  }
  CHECK(testing::fixture("s1a_baseline.csv").bdd_chi2 == doctest::Approx(42.8));
  CHECK(testing::fixture("s1b_attacked.csv").bdd_chi2 == doctest::Approx(67.3));
  CHECK(testing::fixture("s1a_attacked.csv").origin == RecordOrigin::Measurements);
  const FixtureRecord d = testing::fixture("scenario_2d.csv");
  const BranchRow* br = d.find_branch(4, 2);
  REQUIRE(br != nullptr);
  CHECK(br->status_from == BreakerState::Open);
  CHECK(br->p_mw == doctest::Approx(56.1));
}

TEST_CASE("record at a solved state reproduces the solution") {
  const NetworkModel m = build_ieee14();
  const TopologyMatrix t = topology_from_breakers(m);
  const PowerFlowSolution s = solve(m, t);
  const FixtureRecord a = record_from_solution(m, t, s, "pf");
  const FixtureRecord b = record_at_state(m, t, s.v, s.theta, "pf");
  for (std::size_t i = 0; i < 14; ++i) {
    CHECK(std::abs(a.buses[i].p_mw - b.buses[i].p_mw) < 1e-6);
    CHECK(std::abs(a.buses[i].q_mvar - b.buses[i].q_mvar) < 1e-6);
  }
  CHECK(a.bus(3).p_mw == doctest::Approx(-94.2).epsilon(1e-6));
  CHECK_THROWS_AS(a.bus(99), ModelError);
}

}
