#include <doctest.h>

#include "gridsec/error.hpp"
#include "gridsec/som_diff.hpp"
#include "test_support.hpp"

using namespace gridsec;
using namespace gridsec::som;

namespace {

std::vector<SegmentDescriptor> segs(const char* dir) { return load_segments(testing::data_path(dir)); }

GridArrangement reference_grid() { return load_arrangement(testing::data_path("som/reference_arrangement.json")); }

}  // namespace

TEST_SUITE("som_diff") {

TEST_CASE("reference against itself is clean") {
  CHECK(diff_against_reference(segs("som/reference"), reference_grid(), segs("som/reference")).empty());
  CHECK(diff_against_reference(segs("som/reference"), std::nullopt, segs("som/reference")).empty());
}

TEST_CASE("breaker colour change is one violation") {
  const auto fs = diff_against_reference(segs("som/reference"), reference_grid(), segs("som/scenario_3b"));
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].severity == Severity::Violation);
  CHECK(fs[0].rule == RuleKind::MarkerChange);
  CHECK(fs[0].subject.find("CB6_13") != std::string::npos);
  CHECK(fs[0].reference == "Red");
  CHECK(fs[0].observed == "Green");
}

TEST_CASE("voltage change is one deviation") {
  const auto fs = diff_against_reference(segs("som/reference"), reference_grid(), segs("som/scenario_3c"));
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].rule == RuleKind::VoltageDeviation);
  CHECK(fs[0].value("bus") == 2);
  CHECK(fs[0].value("reference_v") == doctest::Approx(1.04));
  CHECK(fs[0].value("observed_v") == doctest::Approx(1.02));
}

TEST_CASE("tolerance and unknown segments") {
  auto cand = segs("som/reference");
  for (auto& s : cand) {
    for (auto& [bus, d] : s.bus_display) d.v *= 1.004;
  }
  CHECK(diff_against_reference(segs("som/reference"), std::nullopt, cand).empty());
  CHECK_FALSE(diff_against_reference(segs("som/reference"), std::nullopt, cand, {.voltage_tolerance = 0.001}).empty());
  cand.front().id = "stranger";
  CHECK_THROWS_AS(diff_against_reference(segs("som/reference"), std::nullopt, cand), ModelError);
}

TEST_CASE("added and removed markers are reported") {
  auto cand = segs("som/reference");
  cand[0].markers.push_back(parse_marker("Ld_99"));
  const auto fs = diff_against_reference(segs("som/reference"), std::nullopt, cand);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].severity == Severity::Warning);
  CHECK(fs[0].rule == RuleKind::MarkerChange);
}

}
