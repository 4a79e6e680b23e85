#include "gridsec/som_diff.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "gridsec/error.hpp"

namespace gridsec::som {

namespace {

std::string colour(BreakerState s) { return s == BreakerState::Closed ? "Red" : "Green"; }

std::string cb_name(int i, int j) { return "CB" + std::to_string(i) + "_" + std::to_string(j); }

using CbKey = std::pair<int, int>;

std::map<CbKey, std::pair<std::string, BreakerState>> breakers(const std::vector<SegmentDescriptor>& segs) {
  std::map<CbKey, std::pair<std::string, BreakerState>> out;
  for (const auto& s : segs) {
    for (const Marker& m : s.markers) {
      if (const auto* cb = std::get_if<CbMarker>(&m)) out[{cb->i, cb->j}] = {s.id, cb->status};
    }
  }
  return out;
}

std::set<std::string> non_breaker_markers(const SegmentDescriptor& s) {
  std::set<std::string> out;
  for (const Marker& m : s.markers) {
    if (!std::holds_alternative<CbMarker>(m)) out.insert(format_marker(m));
  }
  return out;
}

std::string pct(double x) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << 100.0 * x << "%";
  return s.str();
}

}  // namespace

std::vector<Finding> diff_against_reference(const std::vector<SegmentDescriptor>& reference,
                                            const std::optional<GridArrangement>& arrangement,
                                            const std::vector<SegmentDescriptor>& candidate,
                                            const DiffOptions& options) {
  std::map<std::string, const SegmentDescriptor*> ref_by_id;
  for (const auto& s : reference) ref_by_id[s.id] = &s;
  for (const auto& s : candidate) {
    if (!ref_by_id.count(s.id)) throw ModelError("candidate segment '" + s.id + "' is not in the reference");
  }

  std::vector<Finding> out;
  const auto ref_cb = breakers(reference);
  const auto cand_cb = breakers(candidate);

  for (const auto& [key, entry] : cand_cb) {
    const auto& [seg, status] = entry;
    const std::string name = cb_name(key.first, key.second);
    const auto ref = ref_cb.find(key);
    const bool changed = ref != ref_cb.end() && ref->second.second != status;
    const auto mate = cand_cb.find({key.second, key.first});
    const bool mismatch = mate != cand_cb.end() && mate->second.second != status;
    bool mate_changed = false;
    if (mate != cand_cb.end()) {
      const auto mref = ref_cb.find(mate->first);
      mate_changed = mref != ref_cb.end() && mref->second.second != mate->second.second;
    }
    // Report a terminal mismatch once, on the breaker that moved, or on the
    // Open end when neither moved.
    const bool own_mismatch = mismatch && (changed || (!mate_changed && status == BreakerState::Open));
    if (!changed && !own_mismatch) continue;

    Finding f;
    f.rule = RuleKind::MarkerChange;
    f.severity = Severity::Violation;
    f.subject = "segment " + seg + " / " + name;
    f.observed = colour(status);
    f.reference = ref != ref_cb.end() ? colour(ref->second.second) : "absent";
    std::string msg = name + " shows " + colour(status) + " (" + to_string(status) + ")";
    if (changed) msg += " while the reference shows " + f.reference;
    if (mismatch) {
      const std::string mate_name = cb_name(key.second, key.first);
      msg += "; terminal " + mate_name + " in segment " + mate->second.first + " is " +
             colour(mate->second.second) + ", so the two ends of line " + std::to_string(key.first) +
             "-" + std::to_string(key.second) + " disagree";
    }
    if (status == BreakerState::Open && mismatch) msg += " (open CB on in-service line)";
    f.message = msg;
    f.values = {{"from", key.first}, {"to", key.second}, {"status_changed", changed ? 1.0 : 0.0},
                {"terminal_mismatch", mismatch ? 1.0 : 0.0}};
    out.push_back(std::move(f));
  }
  for (const auto& [key, entry] : ref_cb) {
    if (cand_cb.count(key)) continue;
    const bool seg_present = std::any_of(candidate.begin(), candidate.end(),
                                         [&](const auto& s) { return s.id == entry.first; });
    if (!seg_present) continue;
    Finding f{RuleKind::MarkerChange, Severity::Warning, "segment " + entry.first + " / " + cb_name(key.first, key.second),
              cb_name(key.first, key.second) + " is missing from the candidate display", {},
              colour(entry.second), "absent"};
    out.push_back(std::move(f));
  }

  for (const auto& s : candidate) {
    const SegmentDescriptor& r = *ref_by_id.at(s.id);
    for (const auto& [bus, d] : s.bus_display) {
      const auto it = r.bus_display.find(bus);
      if (it == r.bus_display.end()) continue;
      const double rv = it->second.v;
      const double rel = (d.v - rv) / rv;
      if (std::abs(rel) <= options.voltage_tolerance) continue;
      Finding f;
      f.rule = RuleKind::VoltageDeviation;
      f.severity = Severity::Warning;
      f.subject = "segment " + s.id + " / bus " + std::to_string(bus);
      std::ostringstream ro, ob;
      ro << rv;
      ob << d.v;
      f.reference = ro.str() + " pu";
      f.observed = ob.str() + " pu";
      f.message = "bus " + std::to_string(bus) + " displays " + f.observed + " instead of " + f.reference +
                  " (" + pct(rel) + ")";
      f.values = {{"bus", bus}, {"reference_v", rv}, {"observed_v", d.v}, {"relative", rel}};
      out.push_back(std::move(f));
    }

    const auto rm = non_breaker_markers(r);
    const auto cm = non_breaker_markers(s);
    for (const auto& m : rm) {
      if (!cm.count(m)) {
        out.push_back({RuleKind::MarkerChange, Severity::Warning, "segment " + s.id + " / " + m,
                       m + " removed from the candidate display", {}, m, "absent"});
      }
    }
    for (const auto& m : cm) {
      if (!rm.count(m)) {
        out.push_back({RuleKind::MarkerChange, Severity::Warning, "segment " + s.id + " / " + m,
                       m + " is not in the reference display", {}, "absent", m});
      }
    }
  }

  if (arrangement) {
    std::vector<AdjacencyConstraint> cons;
    try {
      cons = generate_constraints(candidate);
    } catch (const ModelError& e) {
      out.push_back({RuleKind::MarkerChange, Severity::Violation, "markers", e.what(), {}, "", ""});
    }
    for (const auto& c : cons) {
      if (c.kind == ConstraintKind::CbTerminalPair) continue;
      const auto v = verify_arrangement(*arrangement, reference, {c});
      if (!v.violated.empty()) {
        out.push_back({RuleKind::MarkerChange, Severity::Violation, "constraint " + c.label,
                       "candidate markers no longer fit the reference layout: " + c.describe(), {},
                       "", ""});
      }
    }
  }
  return out;
}

}  // namespace gridsec::som
