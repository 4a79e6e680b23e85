#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridsec/finding.hpp"
#include "gridsec/grid_model.hpp"
#include "gridsec/records.hpp"

namespace gridsec {

// Rule constants; every field can be overridden from the config file
// (section [rules], same key names).
struct RuleConfig {
  // SensitivityBound: dP/dV between coupled channels at one bus
  double sensitivity_lo = 0.77;
  double sensitivity_hi = 1.07;
  double sensitivity_min_dv = 0.01;   // p.u.
  double sensitivity_min_dp = 0.001;  // p.u.
  // RampRate: generator output change per snapshot interval
  double ramp_limit = 0.10;
  double ramp_min_base = 0.001;  // p.u.
  // ZipViolation: P ~ V^alpha for loads
  double zip_alpha_lo = 0.5;
  double zip_alpha_hi = 2.0;
  double zip_min_rel_dp = 0.30;
  double zip_min_rel_dv = 1e-4;  // below this V counts as unchanged
  // CompensationEntropy
  double compensation_lo = 0.01;  // p.u.
  double compensation_hi = 0.05;
  int compensation_min_count = 3;
  double compensation_entropy_ratio = 0.95;
  // GradientCoherence: V_{k+1} - V_k
  double gradient_max = 0.020;
  // CorrelationShift: across-bus correlation features
  double correlation_shift_max = 0.30;
  // Record-level rules
  double sign_flip_min_mw = 1.0;
  double loss_ratio_warn = 1.5;
  double open_flow_tol_mw = 0.01;
  double island_balance_tol_mw = 0.5;
  double voltage_deviation_warn = 0.005;
};

struct RecordIsland {
  std::vector<int> buses;
  double p_balance_mw = 0.0;  // sum(p_inj) - internal branch losses
  bool balanced = true;
};

struct IslandReport {
  std::vector<RecordIsland> islands;
  bool has_branches = false;
  bool all_flows_zero = false;
  bool all_balanced = true;
  bool breakers_consistent = true;
};

// Components over branches whose stored breakers are both Closed.
IslandReport analyze_record_islands(const FixtureRecord& record, const RuleConfig& config = {});

// Rules on measurement channels run only for measurement-origin snapshots;
// record rules (sign flips, breakers, losses, islands) run for every record.
std::vector<Finding> rule_battery(const FixtureRecord& snapshot, const FixtureRecord& baseline,
                                  const NetworkModel& model, const RuleConfig& config = {});

enum class DetectionClass { Normal, BadData, StealthAttack, FdiPostSe, SystemStress, IslandingValid };

std::string to_string(DetectionClass c);
bool is_attack(DetectionClass c);

struct BddSummary {
  bool flagged = false;
  double j_value = 0.0;
  double threshold = 0.0;
  std::string source;  // "recorded", "recomputed", "upstream"
  std::optional<double> recomputed_j;
};

struct DetectionVerdict {
  DetectionClass detection_class = DetectionClass::Normal;
  std::vector<Finding> findings;
  double feature_chi2 = 0.0;
  std::optional<double> feature_threshold;
  double bdd_chi2 = 0.0;
  BddSummary bdd;
};

bool is_record_level(RuleKind rule);

DetectionVerdict classify(const BddSummary& bdd, double feature_chi2,
                          std::vector<Finding> findings, const IslandReport& islands,
                          RecordOrigin origin);

}  // namespace gridsec
