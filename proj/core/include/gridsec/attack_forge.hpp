#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/grid_model.hpp"
#include "gridsec/measurement.hpp"
#include "gridsec/records.hpp"
#include "gridsec/state_estimation.hpp"

namespace gridsec {

struct StealthFromC {
  Eigen::VectorXd c;
};
struct SweepProvenance {
  int bus = 0;
  double v_target = 0.0;
};
struct Scenario1AProvenance {};
struct Scenario1BProvenance {
  std::optional<std::uint64_t> noise_seed;
};
struct ManualProvenance {
  std::string note;
};

using AttackProvenance = std::variant<StealthFromC, SweepProvenance, Scenario1AProvenance,
                                      Scenario1BProvenance, ManualProvenance>;

std::string provenance_name(const AttackProvenance& p);

// Additive corruption a of a measurement vector, z_a = z + a.
struct AttackVector {
  Eigen::VectorXd deltas;  // p.u., aligned with a MeasurementSet layout
  AttackProvenance provenance = ManualProvenance{};
};

struct AttackComponent {
  MeasurementKind kind = MeasurementKind::Vm;
  int bus = 0;
  double delta = 0.0;
};

// Non-zero bus-channel entries in layout order.
std::vector<AttackComponent> attack_components(const AttackVector& a, const MeasurementSet& layout);

MeasurementSet apply_attack(const MeasurementSet& z, const AttackVector& a);

// Adds bus-channel deltas to a snapshot record (Vm in p.u., P/Q scaled by base).
FixtureRecord apply_attack_to_record(const FixtureRecord& record, const AttackVector& a,
                                     const MeasurementSet& layout, double base_mva);

std::string attack_to_json(const AttackVector& a, const MeasurementSet& layout,
                           const NetworkModel& model);
AttackVector attack_from_json(const std::string& text, const MeasurementSet& layout,
                              const NetworkModel& model);

// Per-bus change in record units: p.u., degrees, MW, Mvar.
struct StateDelta {
  Eigen::VectorXd dv, dtheta, dp, dq;

  static StateDelta zero(std::size_t bus_count);
  bool touches(std::size_t bus_index) const;
};

// a = H c. Throws std::invalid_argument on a dimension mismatch.
AttackVector stealth_from_state_delta(const Eigen::MatrixXd& h, const Eigen::VectorXd& c);
// DC form: c is the angle part of the delta (degrees) at non-reference buses.
AttackVector stealth_from_state_delta(const DcModel& dc, const StateDelta& c);
// AC form: a = h(x + c) - h(x), which leaves noiseless AC residuals at zero.
AttackVector stealth_from_state_delta(const NetworkModel& model, const TopologyMatrix& topology,
                                      const MeasurementSet& layout, const StateVector& x,
                                      const StateDelta& c);

struct Scenario1BOptions {
  std::optional<std::uint64_t> noise_seed;  // no noise when absent
  double noise_amplitude = 0.005;           // uniform +-, p.u.
};

std::vector<int> scenario_1a_compensation_buses();
std::vector<int> scenario_1b_noise_buses();

AttackVector build_scenario_1a(const MeasurementSet& layout);
AttackVector build_scenario_1a();
AttackVector build_scenario_1b(const MeasurementSet& layout, const Scenario1BOptions& options = {});
AttackVector build_scenario_1b(const Scenario1BOptions& options = {});

struct ManipulationResult {
  FixtureRecord original;
  FixtureRecord corrupted;
  std::vector<std::pair<int, int>> recomputed_branches;
};

// x_corrupted = x + dx on stored post-SE rows. Flows of branches touching a
// changed bus become |V_i'||V_j'||Y_ij| sin(theta_i' - theta_j').
ManipulationResult manipulate_state_vector(const FixtureRecord& record, const StateDelta& delta,
                                           const NetworkModel& model);

// Inverts the stored breaker statuses of the listed branches; flows untouched.
FixtureRecord corrupt_topology_record(const FixtureRecord& record,
                                      const std::set<std::pair<int, int>>& flips);

}  // namespace gridsec

namespace gridsec {

// {"buses": [{"bus": 4, "dv": 0.0073, "dtheta_deg": 1.89, "dp_mw": 95.6, "dq_mvar": -7.8}]}
StateDelta state_delta_from_json(const std::string& text, std::size_t bus_count);
std::string state_delta_to_json(const StateDelta& delta);

}  // namespace gridsec
