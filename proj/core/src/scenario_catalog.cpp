#include "gridsec/scenario_catalog.hpp"

#include <algorithm>
#include <sstream>

#include "gridsec/error.hpp"
#include "gridsec/parallel.hpp"

namespace gridsec {

namespace {

std::string pct(double p) {
  std::ostringstream s;
  s << (p > 0 ? "+" : "") << p << "%";
  return s.str();
}

// Swing shift: the old slack keeps its base-case output as a PV unit.
constexpr double kOldSlackDispatch = 232.4;

}  // namespace

std::string describe(const Contingency& c) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BreakerOpen>) {
          std::string s = "open";
          for (const auto& [a, b] : x.branches) s += " " + std::to_string(a) + "-" + std::to_string(b);
          return s;
        } else if constexpr (std::is_same_v<T, TapChange>) {
          return "tap " + std::to_string(x.from) + "-" + std::to_string(x.to) + " " + pct(x.percent);
        } else if constexpr (std::is_same_v<T, LoadChange>) {
          return "load " + std::to_string(x.bus) + " " + pct(x.percent);
        } else if constexpr (std::is_same_v<T, QLimitChange>) {
          std::ostringstream s;
          s << "qmax " << x.bus << " " << (x.q_max_delta_mvar > 0 ? "+" : "") << x.q_max_delta_mvar << " Mvar";
          return s.str();
        } else {
          return "slack -> bus " + std::to_string(x.bus);
        }
      },
      c);
}

const std::vector<ScenarioSpec>& scenario_catalog() {
  static const std::vector<ScenarioSpec> catalog = [] {
    std::vector<ScenarioSpec> s;
    auto add = [&](std::string text, std::vector<Contingency> actions) {
      char id[8];
      std::snprintf(id, sizeof id, "S%02zu", s.size() + 1);
      s.push_back({id, std::move(text), std::move(actions), std::nullopt});
    };
    auto open = [](std::vector<std::pair<int, int>> b) { return Contingency{BreakerOpen{std::move(b)}}; };
    add("All CBs closed (base case)", {});
    add("Open CB between Bus 1 and Bus 2", {open({{1, 2}})});
    add("Open CB between Bus 2 and Bus 4", {open({{2, 4}})});
    add("Open CB between Bus 4 and Bus 5", {open({{4, 5}})});
    add("Open CB between Bus 4 and Bus 7", {open({{4, 7}})});
    add("Open CB between Bus 5 and Bus 6", {open({{5, 6}})});
    add("Open CB between Bus 6 and Bus 13", {open({{6, 13}})});
    add("Tap 4-9 +10%", {TapChange{4, 9, 10.0}});
    add("Tap 4-9 -10%", {TapChange{4, 9, -10.0}});
    add("Tap 7-9 +5%", {TapChange{7, 9, 5.0}});
    add("Tap 7-9 -5%", {TapChange{7, 9, -5.0}});
    add("Load at Bus 4 +20%", {LoadChange{4, 20.0}});
    add("Load at Bus 4 -20%", {LoadChange{4, -20.0}});
    add("Load at Bus 9 +10%", {LoadChange{9, 10.0}});
    add("Load at Bus 10 -15%", {LoadChange{10, -15.0}});
    add("Load at Bus 11 +25%", {LoadChange{11, 25.0}});
    add("Open CB between Bus 9 and Bus 13", {open({{9, 13}})});
    add("Open CB between Bus 3 and Bus 2", {open({{3, 2}})});
    add("Reactive limit at Bus 3 decreased", {QLimitChange{3, -20.0}});
    add("Reactive limit at Bus 8 increased", {QLimitChange{8, 6.0}});
    add("Swing bus shifted from Bus 1 to Bus 2", {SwingShift{2}});
    add("Open CB between Bus 6 and Bus 12", {open({{6, 12}})});
    add("Open CB between Bus 6 and Bus 11", {open({{6, 11}})});
    add("Open CB between Bus 10 and Bus 7", {open({{10, 7}})});
    add("Open CB between Bus 9 and Bus 14", {open({{9, 14}})});
    add("Open CB 2-4 and tap 4-9 +10%", {open({{2, 4}}), TapChange{4, 9, 10.0}});
    add("Open CBs 4-7 and 7-9", {open({{4, 7}, {7, 9}})});
    add("Open CBs 13-14 and 1-5", {open({{13, 14}, {1, 5}})});
    add("Open CBs 7-8 and 11-10", {open({{7, 8}, {11, 10}})});
    add("Open CBs 3-4 and 9-10", {open({{3, 4}, {9, 10}})});
    s.front().expected_class = DetectionClass::Normal;
    return s;
  }();
  return catalog;
}

const ScenarioSpec& find_scenario(const std::string& id) {
  for (const auto& s : scenario_catalog()) {
    if (s.id == id) return s;
  }
  throw ModelError("no scenario '" + id + "'");
}

NetworkModel apply_contingency(const NetworkModel& model, const Contingency& c) {
  return std::visit(
      [&](const auto& x) -> NetworkModel {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BreakerOpen>) {
          NetworkModel m = model;
          for (const auto& [a, b] : x.branches) {
            const auto k = m.try_find_branch(a, b);
            if (!k) {
              throw ModelError("no branch " + std::to_string(a) + "-" + std::to_string(b) + " in the case");
            }
            Branch br = m.branch(*k);
            br.breaker_from = BreakerState::Open;
            br.breaker_to = BreakerState::Open;
            m = m.with_branch(*k, br);
          }
          return m;
        } else if constexpr (std::is_same_v<T, TapChange>) {
          const auto k = model.try_find_branch(x.from, x.to);
          if (!k) throw ModelError("no branch " + std::to_string(x.from) + "-" + std::to_string(x.to));
          Branch br = model.branch(*k);
          br.tap *= 1.0 + x.percent / 100.0;
          return model.with_branch(*k, br);
        } else if constexpr (std::is_same_v<T, LoadChange>) {
          Bus b = model.bus(x.bus);
          b.p_load *= 1.0 + x.percent / 100.0;
          b.q_load *= 1.0 + x.percent / 100.0;
          return model.with_bus(b);
        } else if constexpr (std::is_same_v<T, QLimitChange>) {
          Bus b = model.bus(x.bus);
          if (b.kind == BusKind::Load) throw ModelError("bus " + std::to_string(x.bus) + " has no generator");
          b.q_max += x.q_max_delta_mvar;
          if (b.q_max < b.q_min) throw ModelError("Q limits of bus " + std::to_string(x.bus) + " would cross");
          return model.with_bus(b);
        } else {
          Bus target = model.bus(x.bus);
          if (target.kind == BusKind::Load) {
            throw ModelError("bus " + std::to_string(x.bus) + " has no generator to take the slack");
          }
          target.kind = BusKind::Slack;
          NetworkModel m = model.with_bus(target);
          for (int old : model.slack_buses()) {
            if (old == x.bus) continue;
            Bus b = m.bus(old);
            b.kind = BusKind::Generator;
            b.p_gen = kOldSlackDispatch;
            m = m.with_bus(b);
          }
          return m;
        }
      },
      c);
}

ScenarioOutcome generate_scenario(const NetworkModel& model, const ScenarioSpec& spec,
                                  const PowerFlowOptions& options) {
  ScenarioOutcome out;
  out.spec = spec;
  try {
    NetworkModel m = model;
    for (const Contingency& c : spec.actions) m = apply_contingency(m, c);
    TopologyMatrix t = topology_from_breakers(m);
    PowerFlowSolution sol = solve(m, t, options);
    FixtureRecord rec = record_from_solution(m, t, sol, spec.id);
    rec.meta["description"] = spec.description;
    out.model = std::move(m);
    out.topology = std::move(t);
    out.solution = std::move(sol);
    out.record = std::move(rec);
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<ScenarioOutcome> run_scenarios(const NetworkModel& model, const std::vector<ScenarioSpec>& specs,
                                           unsigned workers, const PowerFlowOptions& options) {
  std::vector<ScenarioOutcome> out(specs.size());
  parallel_for(
      specs.size(), [&](std::size_t k) { out[k] = generate_scenario(model, specs[k], options); }, workers);
  std::sort(out.begin(), out.end(),
            [](const ScenarioOutcome& a, const ScenarioOutcome& b) { return a.spec.id < b.spec.id; });
  return out;
}

}  // namespace gridsec
