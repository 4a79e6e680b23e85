#pragma once

#include <optional>
#include <string>

#include "gridsec/attack_forge.hpp"
#include "gridsec/detector.hpp"
#include "gridsec/features.hpp"
#include "gridsec/measurement.hpp"
#include "gridsec/records.hpp"

namespace gridsec {

struct PipelineOptions {
  RuleConfig rules;
  bool paper_compat = false;  // tau = 89.5 instead of the chi-square quantile
  double alpha = 0.05;
  int recorded_df = 71;       // degrees of freedom assumed for a recorded statistic
  NoiseModel noise;           // sigmas for re-estimating measurement snapshots
  std::optional<BaselineStats> feature_baseline;
};

struct PowerTotals {
  double generation_mw = 0.0;  // sum of positive injections
  double load_mw = 0.0;        // sum of negative injections, as a positive number
  double losses_mw = 0.0;
};

PowerTotals power_totals(const FixtureRecord& record);

struct PipelineReport {
  std::string baseline_source;
  std::string snapshot_source;
  RecordOrigin origin = RecordOrigin::PostSe;
  PowerTotals baseline_totals;
  PowerTotals snapshot_totals;
  IslandReport islands;
  DetectionVerdict verdict;

  double delta_generation_mw() const { return snapshot_totals.generation_mw - baseline_totals.generation_mw; }
  double delta_load_mw() const { return snapshot_totals.load_mw - baseline_totals.load_mw; }
  bool feature_anomalous() const {
    return verdict.feature_threshold && verdict.feature_chi2 > *verdict.feature_threshold;
  }
};

PipelineReport run_pipeline(const NetworkModel& model, const FixtureRecord& baseline,
                            const FixtureRecord& snapshot, const PipelineOptions& options = {});
// The snapshot is the baseline with the attack's bus-channel deltas added.
PipelineReport run_pipeline(const NetworkModel& model, const FixtureRecord& baseline,
                            const AttackVector& attack, const MeasurementSet& layout,
                            const PipelineOptions& options = {});

std::string report_text(const PipelineReport& report);
// Keys sorted, fixed precision; identical inputs give identical bytes.
std::string report_json(const PipelineReport& report);
std::string verdict_json(const DetectionVerdict& verdict);

}  // namespace gridsec
