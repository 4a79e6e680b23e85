#include <doctest.h>

#include <set>

#include "gridsec/error.hpp"
#include "gridsec/scenario_catalog.hpp"
#include "test_support.hpp"

using namespace gridsec;

TEST_SUITE("scenario_catalog") {

TEST_CASE("thirty scenarios with unique ids") {
  const auto& cat = scenario_catalog();
  REQUIRE(cat.size() == 30);
  std::set<std::string> ids;
  for (const ScenarioSpec& s : cat) {
    ids.insert(s.id);
    if (s.id != "S01") CHECK_FALSE(s.actions.empty());  // S01 is the base case
    CHECK_FALSE(s.description.empty());
  }
  CHECK(ids.size() == 30);
  CHECK(*ids.begin() == "S01");
  CHECK(*ids.rbegin() == "S30");
  CHECK(find_scenario("S01").expected_class == DetectionClass::Normal);
  CHECK_THROWS_AS(find_scenario("S31"), ModelError);
}

TEST_CASE("outcomes: three flagged, the rest solve and balance") {
  const auto out = run_scenarios(build_ieee14(), scenario_catalog(), 1);
  REQUIRE(out.size() == 30);
  std::set<std::string> failed;
  for (const ScenarioOutcome& o : out) {
    CAPTURE(o.spec.id);
    if (!o.ok()) {
      failed.insert(o.spec.id);
      CHECK_FALSE(o.record.has_value());
      continue;
    }
    REQUIRE(o.solution.has_value());
    for (const Island& isl : o.solution->islands) CHECK(std::abs(isl.p_balance_mw) < 1e-5);
    CHECK(o.record->source == o.spec.id);
    CHECK(o.record->meta.at("description") == o.spec.description);
  }
  CHECK(failed == std::set<std::string>{"S02", "S17", "S24"});
}

TEST_CASE("parallel and serial runs agree") {
  const auto a = run_scenarios(build_ieee14(), scenario_catalog(), 1);
  const auto b = run_scenarios(build_ieee14(), scenario_catalog(), 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].spec.id == b[i].spec.id);
    CHECK(a[i].error == b[i].error);
    if (a[i].ok()) CHECK(*a[i].record == *b[i].record);
  }
}

TEST_CASE("contingency actions") {
  const NetworkModel m = build_ieee14();
  const NetworkModel load = apply_contingency(m, LoadChange{9, 20.0});
  CHECK(load.bus(9).p_load == doctest::Approx(29.5 * 1.2));
  CHECK(load.bus(9).q_load == doctest::Approx(16.6 * 1.2));
  const NetworkModel tap = apply_contingency(m, TapChange{4, 7, -5.0});
  CHECK(tap.branch(m.find_branch(4, 7)).tap == doctest::Approx(0.978 * 0.95));
  const NetworkModel open = apply_contingency(m, BreakerOpen{{{9, 10}}});
  CHECK_FALSE(open.branch(m.find_branch(9, 10)).in_service());
  const NetworkModel swing = apply_contingency(m, SwingShift{2});
  CHECK(swing.slack_bus() == 2);
  CHECK(swing.bus(1).kind == BusKind::Generator);
  CHECK_THROWS_AS(apply_contingency(m, BreakerOpen{{{9, 13}}}), ModelError);
  CHECK_THROWS_AS(apply_contingency(m, LoadChange{20, 5.0}), ModelError);
  CHECK(describe(Contingency{BreakerOpen{{{2, 4}}}}) == "open 2-4");
}

}
