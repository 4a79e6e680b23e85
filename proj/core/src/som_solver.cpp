#include "gridsec/som_solver.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridsec/error.hpp"

namespace gridsec::som {

using nlohmann::json;

std::string to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::DirComplement: return "DirComplement";
    case ConstraintKind::CpPair: return "CpPair";
    case ConstraintKind::CbTerminalPair: return "CbTerminalPair";
  }
  return "?";
}

std::string AdjacencyConstraint::describe() const {
  std::string s = to_string(kind) + " " + label + ": ";
  switch (kind) {
    case ConstraintKind::DirComplement:
      return s + b + " lies " + to_string(*direction) + " of " + a;
    case ConstraintKind::CpPair:
      return s + b + (side ? " borders the " + to_string(*side) + " edge of " : " borders ") + a;
    case ConstraintKind::CbTerminalPair:
      return s + "terminal statuses in " + a + " and " + b + (statuses_match ? " agree" : " disagree");
  }
  return s;
}

namespace {

std::string pair_name(const char* prefix, int i, int j) {
  return prefix + std::to_string(i) + "_" + std::to_string(j);
}

template <typename T>
std::vector<std::pair<const SegmentDescriptor*, const T*>> collect(
    const std::vector<SegmentDescriptor>& segments) {
  std::vector<std::pair<const SegmentDescriptor*, const T*>> out;
  for (const SegmentDescriptor& s : segments) {
    for (const Marker& m : s.markers) {
      if (const T* x = std::get_if<T>(&m)) out.emplace_back(&s, x);
    }
  }
  return out;
}

}  // namespace

std::vector<AdjacencyConstraint> generate_constraints(const std::vector<SegmentDescriptor>& segments) {
  std::vector<AdjacencyConstraint> out;

  const auto lines = collect<LineDirMarker>(segments);
  for (std::size_t x = 0; x < lines.size(); ++x) {
    const auto& [sa, la] = lines[x];
    for (std::size_t y = 0; y < lines.size(); ++y) {
      const auto& [sb, lb] = lines[y];
      if (lb->i != la->j || lb->j != la->i || la->i > la->j) continue;
      const std::string label =
          pair_name("L", la->i, la->j) + "_" + to_string(la->dir) + "/" +
          pair_name("L", lb->i, lb->j) + "_" + to_string(lb->dir);
      if (sa == sb) throw ModelError("line markers " + label + " both sit in segment " + sa->id);
      if (lb->dir != opposite(la->dir)) {
        throw ModelError("direction pair conflict " + label + " between " + sa->id + " and " + sb->id);
      }
      AdjacencyConstraint c;
      c.kind = ConstraintKind::DirComplement;
      c.a = sa->id;
      c.b = sb->id;
      c.direction = la->dir;
      c.label = label;
      out.push_back(std::move(c));
    }
  }

  const auto cps = collect<CpMarker>(segments);
  for (const auto& [sa, ca] : cps) {
    if (ca->tag != 'A' && ca->tag != 'C') continue;
    const char mate = ca->tag == 'A' ? 'B' : 'D';
    for (const auto& [sb, cb] : cps) {
      if (cb->i != ca->i || cb->j != ca->j || cb->tag != mate) continue;
      const std::string label = pair_name("CP", ca->i, ca->j) + "_" + ca->tag + "/" + mate;
      if (sa == sb) throw ModelError("connection points " + label + " both sit in segment " + sa->id);
      AdjacencyConstraint c;
      c.kind = ConstraintKind::CpPair;
      c.a = sa->id;
      c.b = sb->id;
      c.label = label;
      if (ca->edge && cb->edge && *cb->edge != opposite(*ca->edge)) {
        throw ModelError("connection points " + label + " sit on " + to_string(*ca->edge) + " and " +
                         to_string(*cb->edge) + " edges, which cannot face each other");
      }
      if (ca->edge) {
        c.side = *ca->edge;
      } else if (cb->edge) {
        c.side = opposite(*cb->edge);
      }
      out.push_back(std::move(c));
    }
  }

  const auto cbs = collect<CbMarker>(segments);
  for (const auto& [sa, ca] : cbs) {
    if (ca->i > ca->j) continue;
    for (const auto& [sb, cb] : cbs) {
      if (cb->i != ca->j || cb->j != ca->i) continue;
      AdjacencyConstraint c;
      c.kind = ConstraintKind::CbTerminalPair;
      c.a = sa->id;
      c.b = sb->id;
      c.statuses_match = ca->status == cb->status;
      c.label = pair_name("CB", ca->i, ca->j) + "/" + pair_name("CB", cb->i, cb->j);
      out.push_back(std::move(c));
    }
  }
  return out;
}

bool constraint_holds(const AdjacencyConstraint& c, int ra, int ca, int rb, int cb) {
  const int dr = rb - ra;
  const int dc = cb - ca;
  switch (c.kind) {
    case ConstraintKind::DirComplement: {
      const int rs = row_step(*c.direction);
      const int cs = col_step(*c.direction);
      const int k = rs != 0 ? dr * rs : dc * cs;
      return k >= 1 && dr == k * rs && dc == k * cs;
    }
    case ConstraintKind::CpPair:
      if (c.side) return dr == row_step(*c.side) && dc == col_step(*c.side);
      return std::abs(dr) + std::abs(dc) == 1;
    case ConstraintKind::CbTerminalPair:
      return c.statuses_match;
  }
  return false;
}

std::string arrangement_to_json(const GridArrangement& g) {
  json rows = json::array();
  for (std::size_t r = 0; r < g.n; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < g.n; ++c) row.push_back(g.at(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"n", g.n}, {"cells", std::move(rows)}}.dump(2);
}

GridArrangement arrangement_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const json& rows = doc.is_array() ? doc : doc.at("cells");
    GridArrangement g;
    g.n = rows.size();
    for (const json& row : rows) {
      if (row.size() != g.n) throw ParseError("arrangement is not square");
      for (const json& cell : row) g.cells.push_back(cell.get<std::string>());
    }
    return g;
  } catch (const json::exception& e) {
    throw ParseError(std::string("arrangement JSON: ") + e.what());
  }
}

GridArrangement load_arrangement(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return arrangement_from_json(ss.str());
}

namespace {

struct Edge {
  std::size_t constraint;
  std::size_t other;
  bool self_is_a;
};

class Search {
 public:
  Search(const std::vector<std::string>& ids, const std::vector<AdjacencyConstraint>& constraints,
         std::size_t n, const SolveOptions& options, SolveResult& result)
      : ids_(ids), constraints_(constraints), n_(n), options_(options), result_(result),
        pos_(ids.size(), -1), cell_(n * n, -1), edges_(ids.size()) {
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < ids.size(); ++k) index[ids[k]] = k;
    for (std::size_t k = 0; k < constraints.size(); ++k) {
      const auto& c = constraints[k];
      if (c.kind == ConstraintKind::CbTerminalPair) continue;
      const std::size_t a = index.at(c.a);
      const std::size_t b = index.at(c.b);
      edges_[a].push_back({k, b, true});
      edges_[b].push_back({k, a, false});
    }
  }

  void run() { descend(0); }

 private:
  bool fits(std::size_t seg, std::size_t cell) const {
    const int r = static_cast<int>(cell / n_);
    const int c = static_cast<int>(cell % n_);
    for (const Edge& e : edges_[seg]) {
      const int p = pos_[e.other];
      if (p < 0) continue;
      const int ro = p / static_cast<int>(n_);
      const int co = p % static_cast<int>(n_);
      const auto& k = constraints_[e.constraint];
      const bool ok = e.self_is_a ? constraint_holds(k, r, c, ro, co) : constraint_holds(k, ro, co, r, c);
      if (!ok) return false;
    }
    return true;
  }

  // Returns false once the search should stop.
  bool descend(std::size_t depth) {
    ++result_.nodes;
    if (depth == ids_.size()) return emit();
    std::size_t best_cell = cell_.size();
    std::vector<std::size_t> best;
    for (std::size_t cell = 0; cell < cell_.size(); ++cell) {
      if (cell_[cell] >= 0) continue;
      std::vector<std::size_t> cand;
      for (std::size_t s = 0; s < ids_.size(); ++s) {
        if (pos_[s] < 0 && fits(s, cell)) cand.push_back(s);
      }
      if (best_cell == cell_.size() || cand.size() < best.size()) {
        best_cell = cell;
        best = std::move(cand);
        if (best.empty()) return true;
      }
    }
    for (std::size_t s : best) {
      pos_[s] = static_cast<int>(best_cell);
      cell_[best_cell] = static_cast<int>(s);
      const bool go_on = descend(depth + 1);
      pos_[s] = -1;
      cell_[best_cell] = -1;
      if (!go_on) return false;
    }
    return true;
  }

  bool emit() {
    GridArrangement g;
    g.n = n_;
    for (int s : cell_) g.cells.push_back(ids_[static_cast<std::size_t>(s)]);
    if (options_.visitor && !options_.visitor(g)) {
      result_.solutions.push_back(std::move(g));
      result_.truncated = true;
      return false;
    }
    result_.solutions.push_back(std::move(g));
    if (result_.solutions.size() >= options_.max_solutions) {
      result_.truncated = true;
      return false;
    }
    return true;
  }

  const std::vector<std::string>& ids_;
  const std::vector<AdjacencyConstraint>& constraints_;
  std::size_t n_;
  const SolveOptions& options_;
  SolveResult& result_;
  std::vector<int> pos_;
  std::vector<int> cell_;
  std::vector<std::vector<Edge>> edges_;
};

}  // namespace

SolveResult solve_arrangement(const std::vector<SegmentDescriptor>& segments,
                              const std::vector<AdjacencyConstraint>& constraints, std::size_t n,
                              const SolveOptions& options) {
  if (n * n != segments.size()) {
    throw ModelError("a " + std::to_string(n) + "x" + std::to_string(n) + " grid needs " +
                     std::to_string(n * n) + " segments, got " + std::to_string(segments.size()));
  }
  std::vector<std::string> ids;
  for (const auto& s : segments) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ModelError("duplicate segment id");
  const std::set<std::string> known(ids.begin(), ids.end());
  for (const auto& c : constraints) {
    if (!known.count(c.a) || !known.count(c.b)) {
      throw ModelError("constraint " + c.label + " references an unknown segment");
    }
  }

  SolveResult result;
  const bool consistent = std::all_of(constraints.begin(), constraints.end(), [](const auto& c) {
    return c.kind != ConstraintKind::CbTerminalPair || c.statuses_match;
  });
  if (!consistent || options.max_solutions == 0) return result;
  Search(ids, constraints, n, options, result).run();
  std::sort(result.solutions.begin(), result.solutions.end());
  return result;
}

VerifyResult verify_arrangement(const GridArrangement& g, const std::vector<SegmentDescriptor>& segments,
                                const std::vector<AdjacencyConstraint>& constraints) {
  VerifyResult v;
  std::map<std::string, std::pair<int, int>> where;
  if (g.cells.size() != g.n * g.n) v.problems.push_back("cell count does not match grid size");
  for (std::size_t k = 0; k < g.cells.size(); ++k) {
    const int r = static_cast<int>(k / std::max<std::size_t>(g.n, 1));
    const int c = static_cast<int>(k % std::max<std::size_t>(g.n, 1));
    if (!where.emplace(g.cells[k], std::make_pair(r, c)).second) {
      v.problems.push_back("segment " + g.cells[k] + " placed twice");
    }
  }
  for (const auto& s : segments) {
    if (!where.count(s.id)) v.problems.push_back("segment " + s.id + " not placed");
  }
  if (where.size() != segments.size() && v.problems.empty()) {
    v.problems.push_back("arrangement holds segments that were not supplied");
  }
  for (const auto& c : constraints) {
    const auto ia = where.find(c.a);
    const auto ib = where.find(c.b);
    if (ia == where.end() || ib == where.end()) {
      v.violated.push_back(c);
      continue;
    }
    if (!constraint_holds(c, ia->second.first, ia->second.second, ib->second.first, ib->second.second)) {
      v.violated.push_back(c);
    }
  }
  for (const auto& c : v.violated) v.problems.push_back(c.describe());
  v.ok = v.problems.empty();
  return v;
}

}  // namespace gridsec::som
