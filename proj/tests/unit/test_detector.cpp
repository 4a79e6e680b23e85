#include <doctest.h>

#include <algorithm>

#include "gridsec/detector.hpp"
#include "test_support.hpp"

using namespace gridsec;

namespace {

std::vector<Finding> of_kind(const std::vector<Finding>& fs, RuleKind k) {
  std::vector<Finding> out;
  for (const Finding& f : fs) {
    if (f.rule == k) out.push_back(f);
  }
  return out;
}

bool has(const std::vector<Finding>& fs, RuleKind k, const std::string& subject) {
  return std::any_of(fs.begin(), fs.end(), [&](const Finding& f) { return f.rule == k && f.subject == subject; });
}

const NetworkModel& model() {
  static const NetworkModel m = build_ieee14();
  return m;
}

DetectionVerdict verdict(const FixtureRecord& snap, const FixtureRecord& base, bool flagged = false) {
  BddSummary bdd;
  bdd.flagged = flagged;
  return classify(bdd, 0.0, rule_battery(snap, base, model()), analyze_record_islands(snap), snap.origin);
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("identical snapshots raise nothing") {
  for (const char* name : {"postse_baseline.csv", "s1a_baseline.csv", "sweep_baseline.csv"}) {
    const FixtureRecord r = testing::fixture(name);
    CAPTURE(name);
    CHECK(rule_battery(r, r, model()).empty());
    CHECK(verdict(r, r).detection_class == DetectionClass::Normal);
  }
}

TEST_CASE("sensitivity bound uses the coupled dP/dV ratio") {
  FixtureRecord base = testing::fixture("s1a_baseline.csv");
  FixtureRecord snap = base;
  snap.bus(3).v_pu += 0.08;
  snap.bus(3).p_mw += 15.0;
  const auto fs = rule_battery(snap, base, model());
  const auto sb = of_kind(fs, RuleKind::SensitivityBound);
  REQUIRE(sb.size() == 1);
  CHECK(sb[0].subject == "bus 3");
  CHECK(sb[0].value("sensitivity") == doctest::Approx(0.15 / 0.08));
  CHECK(sb[0].severity == Severity::Violation);

  // Inside the band: dP/dV = 0.9
  FixtureRecord ok = base;
  ok.bus(3).v_pu += 0.02;
  ok.bus(3).p_mw += 1.8;
  CHECK(of_kind(rule_battery(ok, base, model()), RuleKind::SensitivityBound).empty());
}

TEST_CASE("ramp rate on generator buses only") {
  FixtureRecord base = testing::fixture("s1b_baseline.csv");
  FixtureRecord snap = base;
  snap.bus(2).p_mw += 15.0;
  snap.bus(14).p_mw -= 5.0;  // load bus, different rule
  const auto ramps = of_kind(rule_battery(snap, base, model()), RuleKind::RampRate);
  REQUIRE(ramps.size() == 1);
  CHECK(ramps[0].subject == "bus 2");
  CHECK(ramps[0].value("relative_change") == doctest::Approx(15.0 / 21.63));
}

TEST_CASE("ZIP violation needs a large load change at constant voltage") {
  FixtureRecord base = testing::fixture("s1b_baseline.csv");
  FixtureRecord snap = base;
  snap.bus(13).p_mw += 10.0;
  auto fs = rule_battery(snap, base, model());
  auto zip = of_kind(fs, RuleKind::ZipViolation);
  REQUIRE(zip.size() == 1);
  CHECK(zip[0].value("relative_dP") == doctest::Approx(10.0 / 13.16));

  // The same change with V moving enough to explain it is allowed.
  snap.bus(13).v_pu = base.bus(13).v_pu * std::pow(1.0 - 10.0 / 13.16, 1.0 / 1.5);
  fs = rule_battery(snap, base, model());
  CHECK(of_kind(fs, RuleKind::ZipViolation).empty());
}

TEST_CASE("compensation entropy detects evenly spread small changes") {
  FixtureRecord base = testing::fixture("s1a_baseline.csv");
  FixtureRecord snap = base;
  for (int b : {2, 4, 5, 10, 12, 13, 14}) snap.bus(b).p_mw -= 3.57;
  const auto ce = of_kind(rule_battery(snap, base, model()), RuleKind::CompensationEntropy);
  REQUIRE(ce.size() == 1);
  CHECK(ce[0].value("count") == 7);
  CHECK(ce[0].value("entropy") == doctest::Approx(std::log(7.0)));
  CHECK(ce[0].value("total_dP") == doctest::Approx(0.2499));  // magnitude

  // Uneven spread: one dominant change.
  FixtureRecord lumpy = base;
  lumpy.bus(2).p_mw -= 4.9;
  lumpy.bus(4).p_mw -= 1.1;
  lumpy.bus(5).p_mw -= 1.1;
  CHECK(of_kind(rule_battery(lumpy, base, model()), RuleKind::CompensationEntropy).empty());
}

TEST_CASE("gradient coherence flags new steep adjacent differences") {
  FixtureRecord base = testing::fixture("s1a_baseline.csv");
  FixtureRecord snap = base;
  snap.bus(3).v_pu += 0.08;
  const auto g = of_kind(rule_battery(snap, base, model()), RuleKind::GradientCoherence);
  REQUIRE(g.size() == 2);
  CHECK(g[0].subject == "buses 2-3");
  CHECK(g[0].value("gradient") == doctest::Approx(0.045));
  CHECK(g[1].subject == "buses 3-4");
}

TEST_CASE("measurement rules stay silent on post-SE records") {
  FixtureRecord base = testing::fixture("postse_baseline.csv");
  FixtureRecord snap = base;
  snap.bus(2).p_mw += 15.0;
  snap.bus(1).p_mw -= 15.0;
  const auto fs = rule_battery(snap, base, model());
  CHECK(of_kind(fs, RuleKind::RampRate).empty());
  CHECK(of_kind(fs, RuleKind::SensitivityBound).empty());
}

TEST_CASE("sign flips") {
  const FixtureRecord base = testing::fixture("postse_baseline.csv");
  FixtureRecord snap = base;
  snap.bus(9).p_mw = 29.5;
  snap.bus(1).p_mw -= 59.0;
  const auto fs = rule_battery(snap, base, model());
  const auto flips = of_kind(fs, RuleKind::SignFlip);
  REQUIRE(flips.size() == 1);
  CHECK(flips[0].subject == "bus 9");
  CHECK(flips[0].value("P_base_mw") == -29.5);
  CHECK(verdict(snap, base).detection_class == DetectionClass::FdiPostSe);
  // Tiny injections near zero are not sign flips.
  FixtureRecord small = base;
  small.bus(7).p_mw = 0.5;
  CHECK(of_kind(rule_battery(small, base, model()), RuleKind::SignFlip).empty());
}

TEST_CASE("island balance and loss surge") {
  const FixtureRecord base = testing::fixture("postse_baseline.csv");
  FixtureRecord extra = base;
  extra.bus(1).p_mw += 10.0;
  const auto ib = of_kind(rule_battery(extra, base, model()), RuleKind::IslandBalance);
  REQUIRE(ib.size() == 1);
  CHECK(ib[0].value("imbalance_mw") == doctest::Approx(10.0));

  FixtureRecord stress = base;
  double added = 0.0;
  for (BranchRow& br : stress.branches) {
    added += br.loss_mw;
    br.loss_mw *= 2.0;
  }
  stress.bus(1).p_mw += added;
  const auto fs = rule_battery(stress, base, model());
  const auto ls = of_kind(fs, RuleKind::LossSurge);
  REQUIRE(ls.size() == 1);
  CHECK(ls[0].severity == Severity::Warning);
  CHECK(ls[0].value("ratio") == doctest::Approx(2.0));
  CHECK(verdict(stress, base).detection_class == DetectionClass::SystemStress);
}

TEST_CASE("breaker rules") {
  const FixtureRecord base = testing::fixture("postse_baseline.csv");
  const FixtureRecord d = testing::fixture("scenario_2d.csv");
  const auto fs = rule_battery(d, base, model());
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].rule == RuleKind::OpenBreakerFlow);
  CHECK(fs[0].subject == "branch 2-4");
  CHECK(fs[0].value("p_mw") == doctest::Approx(56.1));

  FixtureRecord half = base;
  half.find_branch(9, 10)->status_to = BreakerState::Open;
  CHECK(has(rule_battery(half, base, model()), RuleKind::BreakerPairMismatch, "branch 9-10"));
  CHECK(is_record_level(RuleKind::BreakerPairMismatch));
  CHECK_FALSE(is_record_level(RuleKind::LossSurge));
}

TEST_CASE("island analysis") {
  const IslandReport whole = analyze_record_islands(testing::fixture("postse_baseline.csv"));
  CHECK(whole.islands.size() == 1);
  CHECK(whole.all_balanced);
  CHECK_FALSE(whole.all_flows_zero);

  const IslandReport split = analyze_record_islands(testing::fixture("scenario_2c.csv"));
  CHECK(split.islands.size() == 14);
  CHECK(split.all_flows_zero);
  CHECK(split.breakers_consistent);

  FixtureRecord radial = testing::fixture("postse_baseline.csv");
  BranchRow* br = radial.find_branch(7, 8);
  br->status_from = br->status_to = BreakerState::Open;
  br->p_mw = br->q_mvar = br->loss_mw = 0.0;
  const IslandReport two = analyze_record_islands(radial);
  REQUIRE(two.islands.size() == 2);
  CHECK(two.islands[1].buses == std::vector<int>{8});

  const IslandReport none = analyze_record_islands(testing::fixture("s1a_baseline.csv"));
  CHECK_FALSE(none.has_branches);
}

TEST_CASE("classification precedence") {
  const FixtureRecord base = testing::fixture("postse_baseline.csv");
  const FixtureRecord c = testing::fixture("scenario_2c.csv");
  CHECK(verdict(c, base).detection_class == DetectionClass::IslandingValid);
  CHECK(verdict(c, base, true).detection_class == DetectionClass::BadData);
  const FixtureRecord s1a = testing::fixture("s1a_attacked.csv");
  CHECK(verdict(s1a, testing::fixture("s1a_baseline.csv")).detection_class == DetectionClass::StealthAttack);
  CHECK(is_attack(DetectionClass::StealthAttack));
  CHECK(is_attack(DetectionClass::FdiPostSe));
  CHECK_FALSE(is_attack(DetectionClass::IslandingValid));
  CHECK_FALSE(is_attack(DetectionClass::SystemStress));
  CHECK_FALSE(is_attack(DetectionClass::BadData));
  CHECK(to_string(DetectionClass::FdiPostSe) == "FdiPostSe");
}

TEST_CASE("rule constants come from the config") {
  FixtureRecord base = testing::fixture("s1b_baseline.csv");
  FixtureRecord snap = base;
  snap.bus(2).p_mw += 3.0;  // 13.9%
  CHECK(of_kind(rule_battery(snap, base, model()), RuleKind::RampRate).size() == 1);
  RuleConfig loose;
  loose.ramp_limit = 0.2;
  CHECK(of_kind(rule_battery(snap, base, model(), loose), RuleKind::RampRate).empty());
}

}
