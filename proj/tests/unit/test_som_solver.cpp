#include <doctest.h>

#include <algorithm>
#include <random>

#include "gridsec/error.hpp"
#include "gridsec/som_solver.hpp"
#include "som_oracle.hpp"
#include "test_support.hpp"

using namespace gridsec;
using namespace gridsec::som;

namespace {

std::vector<std::string> ids_of(const std::vector<SegmentDescriptor>& s) {
  std::vector<std::string> ids;
  for (const auto& x : s) ids.push_back(x.id);
  return ids;
}

}  // namespace

TEST_SUITE("som_solver") {

TEST_CASE("reference segments have exactly the reference arrangement") {
  const auto segs = load_segments(testing::data_path("som/reference"));
  const auto cs = generate_constraints(segs);
  const SolveResult r = solve_arrangement(segs, cs, 3);
  REQUIRE(r.solutions.size() == 1);
  CHECK_FALSE(r.truncated);
  const GridArrangement ref = load_arrangement(testing::data_path("som/reference_arrangement.json"));
  CHECK(r.solutions[0] == ref);
  CHECK(verify_arrangement(ref, segs, cs).ok);
}

TEST_CASE("the misplaced arrangement fails verification") {
  const auto segs = load_segments(testing::data_path("som/reference"));
  const auto cs = generate_constraints(segs);
  const VerifyResult v =
      verify_arrangement(load_arrangement(testing::data_path("som/fig8_arrangement.json")), segs, cs);
  CHECK_FALSE(v.ok);
  CHECK_FALSE(v.violated.empty());
  CHECK(v.problems.size() >= v.violated.size());
}

TEST_CASE("solver equals brute force on random 2x2 and 3x3 instances") {
  std::mt19937_64 rng(2718);
  int solvable = 0;
  int unsolvable = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = trial % 5 == 0 ? 3 : 2;
    const auto segs = testing::random_instance(rng, n);
    std::vector<AdjacencyConstraint> cs;
    try {
      cs = generate_constraints(segs);
    } catch (const ModelError&) {
      continue;
    }
    const auto want = testing::brute_force(ids_of(segs), cs, n);
    const SolveResult got = solve_arrangement(segs, cs, n);
    if (got.truncated) {
      // Capped enumeration returns a subset of the true set.
      CHECK(got.solutions.size() == SolveOptions{}.max_solutions);
      CHECK(want.size() > got.solutions.size());
      for (const GridArrangement& g : got.solutions) {
        CHECK(std::binary_search(want.begin(), want.end(), g));
      }
      continue;
    }
    CHECK(got.solutions == want);
    (want.empty() ? unsolvable : solvable)++;
    for (const GridArrangement& g : got.solutions) CHECK(verify_arrangement(g, segs, cs).ok);
  }
  CHECK(solvable > 50);
  CHECK(unsolvable > 10);
}

TEST_CASE("constraint generation") {
  SegmentDescriptor a{"a", {parse_marker("L1_2_S"), parse_marker("CP3_4_A:east"), parse_marker("CB5_6:R")}, {}};
  SegmentDescriptor b{"b", {parse_marker("L2_1_N"), parse_marker("CP3_4_B"), parse_marker("CB6_5:G")}, {}};
  const auto cs = generate_constraints({a, b});
  REQUIRE(cs.size() == 3);
  CHECK(cs[0].kind == ConstraintKind::DirComplement);
  CHECK(cs[0].direction == Direction::S);
  CHECK(cs[1].kind == ConstraintKind::CpPair);
  CHECK(cs[1].side == Side::East);
  CHECK(cs[2].kind == ConstraintKind::CbTerminalPair);
  CHECK_FALSE(cs[2].statuses_match);
  // The CB statuses disagree, so no placement of a and b works.
  const SegmentDescriptor f1{"f1", {}, {}};
  const SegmentDescriptor f2{"f2", {}, {}};
  CHECK(solve_arrangement({a, b, f1, f2}, cs, 2).solutions.empty());

  SegmentDescriptor bad{"c", {parse_marker("L2_1_E")}, {}};
  CHECK_THROWS_AS(generate_constraints({a, bad}), ModelError);
  SegmentDescriptor same{"d", {parse_marker("L7_8_N"), parse_marker("L8_7_S")}, {}};
  CHECK_THROWS_AS(generate_constraints({same}), ModelError);
  CHECK_THROWS_AS(solve_arrangement({a, b}, {}, 3), ModelError);
}

TEST_CASE("ray semantics for direction pairs") {
  AdjacencyConstraint c;
  c.kind = ConstraintKind::DirComplement;
  c.direction = Direction::S;
  CHECK(constraint_holds(c, 0, 1, 1, 1));
  CHECK(constraint_holds(c, 0, 1, 2, 1));
  CHECK_FALSE(constraint_holds(c, 0, 1, 2, 2));
  CHECK_FALSE(constraint_holds(c, 1, 1, 0, 1));
  c.direction = Direction::NE;
  CHECK(constraint_holds(c, 2, 0, 0, 2));
  CHECK_FALSE(constraint_holds(c, 2, 0, 1, 2));
}

TEST_CASE("cap and visitor") {
  std::vector<SegmentDescriptor> free;
  for (int k = 0; k < 4; ++k) free.push_back({"f" + std::to_string(k), {}, {}});
  const SolveResult all = solve_arrangement(free, {}, 2);
  CHECK(all.solutions.size() == 24);
  const SolveResult capped = solve_arrangement(free, {}, 2, {.max_solutions = 5, .visitor = {}});
  CHECK(capped.solutions.size() == 5);
  CHECK(capped.truncated);
  int seen = 0;
  solve_arrangement(free, {}, 2, {.max_solutions = 100, .visitor = [&](const GridArrangement&) {
                                    return ++seen < 3;
                                  }});
  CHECK(seen == 3);
}

TEST_CASE("arrangement JSON") {
  const GridArrangement g{2, {"a", "b", "c", "d"}};
  CHECK(arrangement_from_json(arrangement_to_json(g)) == g);
  CHECK(arrangement_from_json(R"([["a","b"],["c","d"]])") == g);
  CHECK_THROWS_AS(arrangement_from_json(R"([["a","b"],["c"]])"), ParseError);
}

}
