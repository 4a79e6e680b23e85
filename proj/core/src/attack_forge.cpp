#include "gridsec/attack_forge.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gridsec/error.hpp"

namespace gridsec {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::size_t require(const MeasurementSet& layout, MeasurementKind kind, int bus) {
  auto idx = layout.find(kind, bus);
  if (!idx) {
    throw ModelError("measurement layout lacks " + to_string(kind) + " at bus " +
                     std::to_string(bus));
  }
  return *idx;
}

// Portable uniform draw in [0, 1) so seeded vectors match across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string provenance_name(const AttackProvenance& p) {
  struct Visitor {
    std::string operator()(const StealthFromC&) const { return "stealth_from_c"; }
    std::string operator()(const SweepProvenance&) const { return "sweep"; }
    std::string operator()(const Scenario1AProvenance&) const { return "scenario_1a"; }
    std::string operator()(const Scenario1BProvenance&) const { return "scenario_1b"; }
    std::string operator()(const ManualProvenance&) const { return "manual"; }
  };
  return std::visit(Visitor{}, p);
}

std::vector<AttackComponent> attack_components(const AttackVector& a,
                                               const MeasurementSet& layout) {
  if (a.deltas.size() != static_cast<Eigen::Index>(layout.size())) {
    throw std::invalid_argument("attack dimension does not match the measurement layout");
  }
  std::vector<AttackComponent> out;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const double d = a.deltas(static_cast<Eigen::Index>(i));
    if (d == 0.0 || layout.entries[i].is_flow()) continue;
    out.push_back({layout.entries[i].kind, layout.entries[i].bus, d});
  }
  return out;
}

MeasurementSet apply_attack(const MeasurementSet& z, const AttackVector& a) {
  if (a.deltas.size() != static_cast<Eigen::Index>(z.size())) {
    throw std::invalid_argument("attack dimension does not match the measurement count");
  }
  MeasurementSet out = z;
  out.set_values(z.values() + a.deltas);
  return out;
}

FixtureRecord apply_attack_to_record(const FixtureRecord& record, const AttackVector& a,
                                     const MeasurementSet& layout, double base_mva) {
  FixtureRecord out = record;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const double d = a.deltas(static_cast<Eigen::Index>(i));
    const Measurement& m = layout.entries[i];
    if (d == 0.0) continue;
    if (m.is_flow()) throw ModelError("record attacks support bus channels only");
    BusRow& row = out.bus(m.bus);
    switch (m.kind) {
      case MeasurementKind::Vm: row.v_pu += d; break;
      case MeasurementKind::Pinj: row.p_mw += d * base_mva; break;
      default: row.q_mvar += d * base_mva; break;
    }
  }
  return out;
}

std::string attack_to_json(const AttackVector& a, const MeasurementSet& layout,
                           const NetworkModel& model) {
  if (a.deltas.size() != static_cast<Eigen::Index>(layout.size())) {
    throw std::invalid_argument("attack dimension does not match the measurement layout");
  }
  json doc;
  doc["provenance"] = provenance_name(a.provenance);
  if (const auto* s = std::get_if<Scenario1BProvenance>(&a.provenance); s && s->noise_seed) {
    doc["noise_seed"] = *s->noise_seed;
  }
  if (const auto* s = std::get_if<SweepProvenance>(&a.provenance)) {
    doc["bus"] = s->bus;
    doc["v_target"] = s->v_target;
  }
  if (const auto* s = std::get_if<ManualProvenance>(&a.provenance); s && !s->note.empty()) {
    doc["note"] = s->note;
  }
  doc["dimension"] = layout.size();
  json comps = json::array();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const double d = a.deltas(static_cast<Eigen::Index>(i));
    if (d == 0.0) continue;
    const std::string label = measurement_label(layout.entries[i], model);
    comps.push_back({{"index", i}, {"channel", label}, {"delta", d}});
  }
  doc["components"] = std::move(comps);
  return doc.dump(2);
}

AttackVector attack_from_json(const std::string& text, const MeasurementSet& layout,
                              const NetworkModel& model) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("attack file: ") + e.what());
  }
  AttackVector a;
  a.deltas = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
  a.provenance = ManualProvenance{doc.value("note", std::string())};
  for (const json& c : doc.at("components")) {
    const std::string channel = c.at("channel").get<std::string>();
    bool found = false;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (measurement_label(layout.entries[i], model) == channel) {
        a.deltas(static_cast<Eigen::Index>(i)) += c.at("delta").get<double>();
        found = true;
        break;
      }
    }
    if (!found) throw ParseError("attack file: channel '" + channel + "' not in layout");
  }
  return a;
}

StateDelta StateDelta::zero(std::size_t bus_count) {
  const auto n = static_cast<Eigen::Index>(bus_count);
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
          Eigen::VectorXd::Zero(n)};
}

bool StateDelta::touches(std::size_t i) const {
  const auto k = static_cast<Eigen::Index>(i);
  return dv(k) != 0.0 || dtheta(k) != 0.0;
}

AttackVector stealth_from_state_delta(const Eigen::MatrixXd& h, const Eigen::VectorXd& c) {
  if (c.size() != h.cols()) {
    throw std::invalid_argument("stealth_from_state_delta: c has " + std::to_string(c.size()) +
                                " entries, H has " + std::to_string(h.cols()) + " columns");
  }
  return {h * c, StealthFromC{c}};
}

AttackVector stealth_from_state_delta(const DcModel& dc, const StateDelta& c) {
  const Eigen::Index n = c.dtheta.size();
  if (n != dc.h.cols() + 1) throw std::invalid_argument("stealth_from_state_delta: bus count");
  Eigen::VectorXd cx(n - 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == dc.reference_bus - 1) {
      if (c.dtheta(i) != 0.0) throw ModelError("state delta moves the reference angle");
      continue;
    }
    cx(k++) = c.dtheta(i) * kDeg;
  }
  return stealth_from_state_delta(dc.h, cx);
}

AttackVector stealth_from_state_delta(const NetworkModel& model, const TopologyMatrix& topology,
                                      const MeasurementSet& layout, const StateVector& x,
                                      const StateDelta& c) {
  const AcMeasurementModel hm(model, topology, layout.entries);
  if (c.dv.size() != x.v.size()) throw std::invalid_argument("stealth_from_state_delta: bus count");
  if (c.dtheta(hm.reference_bus() - 1) != 0.0) {
    throw ModelError("state delta moves the reference angle");
  }
  StateVector xa = x;
  xa.v += c.dv;
  xa.theta += c.dtheta * kDeg;
  const Eigen::VectorXd a = hm.evaluate(xa) - hm.evaluate(x);
  const Eigen::VectorXd cx = xa.packed() - x.packed();
  return {a, StealthFromC{cx}};
}

std::vector<int> scenario_1a_compensation_buses() { return {2, 4, 5, 10, 12, 13, 14}; }
std::vector<int> scenario_1b_noise_buses() { return {1, 5, 7, 8, 10, 12, 14}; }

AttackVector build_scenario_1a(const MeasurementSet& layout) {
  AttackVector a;
  a.deltas = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
  a.provenance = Scenario1AProvenance{};
  auto set = [&](MeasurementKind k, int bus, double d) {
    a.deltas(static_cast<Eigen::Index>(require(layout, k, bus))) = d;
  };
  set(MeasurementKind::Vm, 3, 0.08);
  set(MeasurementKind::Pinj, 3, 0.15);
  set(MeasurementKind::Vm, 6, -0.06);
  set(MeasurementKind::Pinj, 9, 0.10);
  set(MeasurementKind::Vm, 11, 0.05);
  for (int bus : scenario_1a_compensation_buses()) set(MeasurementKind::Pinj, bus, -0.0357);
  return a;
}

AttackVector build_scenario_1a() { return build_scenario_1a(bus_measurement_layout(build_ieee14())); }

AttackVector build_scenario_1b(const MeasurementSet& layout, const Scenario1BOptions& options) {
  AttackVector a;
  a.deltas = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
  a.provenance = Scenario1BProvenance{options.noise_seed};
  auto set = [&](MeasurementKind k, int bus, double d) {
    a.deltas(static_cast<Eigen::Index>(require(layout, k, bus))) = d;
  };
  set(MeasurementKind::Vm, 2, 0.09);
  set(MeasurementKind::Pinj, 2, 0.15);
  set(MeasurementKind::Vm, 4, -0.07);
  set(MeasurementKind::Pinj, 4, -0.13);
  set(MeasurementKind::Vm, 6, 0.08);
  set(MeasurementKind::Pinj, 9, 0.12);
  set(MeasurementKind::Vm, 11, -0.06);
  set(MeasurementKind::Pinj, 13, -0.10);
  if (options.noise_seed) {
    std::mt19937_64 rng(*options.noise_seed);
    for (int bus : scenario_1b_noise_buses()) {
      for (MeasurementKind k : {MeasurementKind::Vm, MeasurementKind::Pinj}) {
        const double d = options.noise_amplitude * (2.0 * unit_uniform(rng) - 1.0);
        a.deltas(static_cast<Eigen::Index>(require(layout, k, bus))) += d;
      }
    }
  }
  return a;
}

AttackVector build_scenario_1b(const Scenario1BOptions& options) {
  return build_scenario_1b(bus_measurement_layout(build_ieee14()), options);
}

ManipulationResult manipulate_state_vector(const FixtureRecord& record, const StateDelta& delta,
                                           const NetworkModel& model) {
  const std::size_t n = model.bus_count();
  if (static_cast<std::size_t>(delta.dv.size()) != n || record.buses.size() != n) {
    throw ModelError("state delta, record and model disagree on the bus count");
  }
  const auto slack = static_cast<Eigen::Index>(model.index_of(model.slack_bus()));
  if (delta.dv(slack) != 0.0 || delta.dtheta(slack) != 0.0 || delta.dp(slack) != 0.0 ||
      delta.dq(slack) != 0.0) {
    throw ModelError("state delta must leave the slack bus untouched");
  }
  ManipulationResult out{record, record, {}};
  for (BusRow& row : out.corrupted.buses) {
    const auto i = static_cast<Eigen::Index>(model.index_of(row.bus));
    row.v_pu += delta.dv(i);
    row.theta_deg += delta.dtheta(i);
    row.p_mw += delta.dp(i);
    row.q_mvar += delta.dq(i);
  }
  for (BranchRow& row : out.corrupted.branches) {
    const std::size_t f = model.index_of(row.from);
    const std::size_t t = model.index_of(row.to);
    if (!delta.touches(f) && !delta.touches(t)) continue;
    const BusRow& bf = out.corrupted.bus(row.from);
    const BusRow& bt = out.corrupted.bus(row.to);
    const double yabs = std::abs(branch_admittance(model.branch(model.find_branch(row.from, row.to))).yft);
    row.p_mw = bf.v_pu * bt.v_pu * yabs * std::sin((bf.theta_deg - bt.theta_deg) * kDeg) *
               model.base_mva();
    out.recomputed_branches.emplace_back(row.from, row.to);
  }
  return out;
}

FixtureRecord corrupt_topology_record(const FixtureRecord& record,
                                      const std::set<std::pair<int, int>>& flips) {
  FixtureRecord out = record;
  auto invert = [](BreakerState s) {
    return s == BreakerState::Closed ? BreakerState::Open : BreakerState::Closed;
  };
  for (auto [a, b] : flips) {
    BranchRow* row = out.find_branch(a, b);
    if (!row) {
      throw ModelError("record has no branch " + std::to_string(a) + "-" + std::to_string(b));
    }
    row->status_from = invert(row->status_from);
    row->status_to = invert(row->status_to);
  }
  return out;
}

StateDelta state_delta_from_json(const std::string& text, std::size_t bus_count) {
  StateDelta d = StateDelta::zero(bus_count);
  try {
    const json doc = json::parse(text);
    for (const json& b : doc.at("buses")) {
      const int id = b.at("bus").get<int>();
      if (id < 1 || id > static_cast<int>(bus_count)) {
        throw ParseError("state delta: unknown bus " + std::to_string(id));
      }
      const auto i = static_cast<Eigen::Index>(id - 1);
      d.dv(i) += b.value("dv", 0.0);
      d.dtheta(i) += b.value("dtheta_deg", 0.0);
      d.dp(i) += b.value("dp_mw", 0.0);
      d.dq(i) += b.value("dq_mvar", 0.0);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("state delta: ") + e.what());
  }
  return d;
}

std::string state_delta_to_json(const StateDelta& delta) {
  json buses = json::array();
  for (Eigen::Index i = 0; i < delta.dv.size(); ++i) {
    if (delta.dv(i) == 0.0 && delta.dtheta(i) == 0.0 && delta.dp(i) == 0.0 && delta.dq(i) == 0.0) {
      continue;
    }
    buses.push_back({{"bus", i + 1},
                     {"dv", delta.dv(i)},
                     {"dtheta_deg", delta.dtheta(i)},
                     {"dp_mw", delta.dp(i)},
                     {"dq_mvar", delta.dq(i)}});
  }
  return json{{"buses", buses}}.dump(2);
}

}  // namespace gridsec
