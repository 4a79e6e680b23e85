#include <doctest.h>

#include "gridsec/error.hpp"
#include "gridsec/som_markers.hpp"
#include "test_support.hpp"

using namespace gridsec;
using namespace gridsec::som;

TEST_SUITE("som_markers") {

TEST_CASE("each marker form parses") {
  const Marker cb = parse_marker("CB6_13:G");
  REQUIRE(std::holds_alternative<CbMarker>(cb));
  CHECK(std::get<CbMarker>(cb).i == 6);
  CHECK(std::get<CbMarker>(cb).j == 13);
  CHECK(std::get<CbMarker>(cb).status == BreakerState::Open);
  CHECK(std::get<CbMarker>(parse_marker("CB1_2")).status == BreakerState::Closed);

  const Marker l = parse_marker("L1_2_SE");
  REQUIRE(std::holds_alternative<LineDirMarker>(l));
  CHECK(std::get<LineDirMarker>(l).dir == Direction::SE);

  const Marker cp = parse_marker("CP2_3_C:west");
  REQUIRE(std::holds_alternative<CpMarker>(cp));
  CHECK(std::get<CpMarker>(cp).tag == 'C');
  CHECK(std::get<CpMarker>(cp).edge == Side::West);
  CHECK_FALSE(std::get<CpMarker>(parse_marker("CP2_3_B")).edge.has_value());

  CHECK(std::get<LoadMarker>(parse_marker("Ld_14")).bus == 14);
}

TEST_CASE("format is the inverse of parse") {
  for (const char* t : {"CB6_13:G", "CB1_2:R", "L6_13_N", "L10_11_SW", "CP2_3_A", "CP2_3_D:north", "Ld_6"}) {
    CHECK(format_marker(parse_marker(t)) == t);
  }
  const auto list = parse_marker_list("CB1_2:R; L1_2_S ;Ld_1");
  CHECK(list.size() == 3);
}

TEST_CASE("malformed tokens name the position and the token") {
  for (const char* t : {"CB6-13", "L1_2_UP", "CP1_2_E", "Ld6", "", "cb1_2", "CB1_2:Y"}) {
    CAPTURE(t);
    CHECK_THROWS_AS(parse_marker(t, 4), ParseError);
  }
  try {
    parse_marker("L1_2_UP", 4);
    FAIL("no throw");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("L1_2_UP") != std::string::npos);
    CHECK(what.find('4') != std::string::npos);
  }
}

TEST_CASE("direction helpers") {
  for (Direction d : {Direction::N, Direction::S, Direction::E, Direction::W, Direction::NE, Direction::NW,
                      Direction::SE, Direction::SW}) {
    CHECK(opposite(opposite(d)) == d);
    CHECK(row_step(opposite(d)) == -row_step(d));
    CHECK(col_step(opposite(d)) == -col_step(d));
  }
  CHECK(row_step(Direction::N) == -1);
  CHECK(col_step(Direction::E) == 1);
  CHECK(opposite(Side::East) == Side::West);
}

TEST_CASE("segment JSON") {
  const SegmentDescriptor s = segment_from_json(
      R"({"id": "x", "markers": "CB1_2:R; Ld_1", "bus_display": {"1": 1.06, "2": {"v": 1.045, "q": 30}}})");
  CHECK(s.markers.size() == 2);
  CHECK(s.bus_display.at(1).v == 1.06);
  CHECK(s.bus_display.at(2).extras.at("q") == 30);
  const SegmentDescriptor back = segment_from_json(segment_to_json(s));
  CHECK(back.id == "x");
  CHECK(back.markers.size() == 2);
  CHECK(back.bus_display.at(2).v == 1.045);
  CHECK_THROWS_AS(segment_from_json(R"({"markers": []})"), ParseError);

  const auto ref = load_segments(testing::data_path("som/reference"));
  REQUIRE(ref.size() == 9);
  CHECK(ref.front().id == "seg1");
  CHECK(ref.back().id == "seg9");
}

}
