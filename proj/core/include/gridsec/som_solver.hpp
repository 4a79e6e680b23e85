#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridsec/som_markers.hpp"

namespace gridsec::som {

enum class ConstraintKind { DirComplement, CpPair, CbTerminalPair };

std::string to_string(ConstraintKind k);

// Placement constraints read as "b relative to a". DirComplement puts b anywhere
// along the ray from a in `direction`; CpPair needs edge adjacency, on `side`
// of a when known. CbTerminalPair does not depend on placement.
struct AdjacencyConstraint {
  ConstraintKind kind = ConstraintKind::DirComplement;
  std::string a;
  std::string b;
  std::optional<Direction> direction;
  std::optional<Side> side;
  bool statuses_match = true;
  std::string label;  // "L1_2_S/L2_1_N", "CP1_2_A/B", "CB6_13/CB13_6"

  std::string describe() const;
};

// Throws ModelError on conflicting direction pairs or CP edges.
std::vector<AdjacencyConstraint> generate_constraints(const std::vector<SegmentDescriptor>& segments);

struct GridArrangement {
  std::size_t n = 0;
  std::vector<std::string> cells;  // row-major

  const std::string& at(std::size_t row, std::size_t col) const { return cells[row * n + col]; }
  bool operator==(const GridArrangement& o) const { return n == o.n && cells == o.cells; }
  bool operator<(const GridArrangement& o) const { return cells < o.cells; }
};

std::string arrangement_to_json(const GridArrangement& g);
GridArrangement arrangement_from_json(const std::string& text);
GridArrangement load_arrangement(const std::filesystem::path& path);

// Evaluates one constraint against a full placement (row, col per segment id).
bool constraint_holds(const AdjacencyConstraint& c, int row_a, int col_a, int row_b, int col_b);

struct SolveOptions {
  std::size_t max_solutions = 100000;
  // Called in search order; returning false stops the search.
  std::function<bool(const GridArrangement&)> visitor;
};

struct SolveResult {
  std::vector<GridArrangement> solutions;  // sorted
  bool truncated = false;
  std::size_t nodes = 0;
};

SolveResult solve_arrangement(const std::vector<SegmentDescriptor>& segments,
                              const std::vector<AdjacencyConstraint>& constraints, std::size_t n,
                              const SolveOptions& options = {});

struct VerifyResult {
  bool ok = true;
  std::vector<AdjacencyConstraint> violated;
  std::vector<std::string> problems;  // structural issues, then violated constraints
};

VerifyResult verify_arrangement(const GridArrangement& arrangement,
                                const std::vector<SegmentDescriptor>& segments,
                                const std::vector<AdjacencyConstraint>& constraints);

}  // namespace gridsec::som
