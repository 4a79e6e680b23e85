#pragma once

#include <string>
#include <vector>

#include "gridsec/chi_square.hpp"
#include "gridsec/grid_model.hpp"
#include "gridsec/measurement.hpp"
#include "gridsec/records.hpp"

namespace gridsec {

enum class SweepEstimator {
  Ac,          // full Gauss-Newton WLS per candidate
  Linearized,  // fixed Jacobian at the baseline state (DC-style linear WLS)
};

struct SweepOptions {
  int n_points = 300;
  double window_lo = 0.95;
  double window_hi = 1.10;
  double nerc_lo = 0.95;
  double nerc_hi = 1.05;
  double threshold = kPaperCompatThreshold;
  // Telemetry accuracy assumed for the sweep: same 1:2 ratio as the default
  // noise model, scaled to revenue-grade metering.
  NoiseModel noise{0.0005, 0.001};
  SweepEstimator estimator = SweepEstimator::Ac;
  bool refine_edges = true;  // bisect the detection boundary between grid points
  int refine_iterations = 40;
};

struct SweepPoint {
  int bus = 0;
  double attack_vm = 0.0;
  double original_vm = 0.0;
  bool detected = false;
  double j_value = 0.0;
  std::string label;  // "Bad data detected", "Stealth attack", "NERC violation"
};

struct StealthRange {
  int bus = 0;
  BusKind kind = BusKind::Load;
  double start = 0.0;
  double end = 0.0;
  double width = 0.0;
  double original_v = 0.0;
  bool empty = true;
  // Evading grid points exist outside the reported span.
  bool fragmented = false;
};

struct SweepResult {
  StealthRange range;
  std::vector<SweepPoint> points;
};

// Replaces the bus's Vm measurement in the noiseless baseline (taken from
// the record) with each candidate and runs estimation plus the chi-square test.
SweepResult sweep_stealth_range(const NetworkModel& model, const FixtureRecord& baseline, int bus,
                                const SweepOptions& options = {});

std::vector<SweepResult> sweep_all_buses(const NetworkModel& model, const FixtureRecord& baseline,
                                         const SweepOptions& options = {}, unsigned workers = 0);

// Columns: Bus, Attack_Vm, Original_Vm, Detected, Anomaly Detection
std::string sweep_log_csv(const std::vector<SweepResult>& results);
// Columns: Bus No., Bus type, Stealth attack_start point, Stealth attack_end point,
// Stealth attack_width, Original voltage
std::string range_summary_csv(const std::vector<SweepResult>& results);

}  // namespace gridsec
