#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridsec/grid_model.hpp"
#include "gridsec/power_flow.hpp"

namespace gridsec {

// Where a snapshot came from: raw telemetry before estimation, or the
// estimator's stored output (the EMS database rows operators see).
enum class RecordOrigin { Measurements, PostSe };

std::string to_string(RecordOrigin origin);
RecordOrigin record_origin_from_string(const std::string& s);

struct BusRow {
  int bus = 0;
  double v_pu = 0.0;
  double theta_deg = 0.0;
  double p_mw = 0.0;    // net injection, generation positive
  double q_mvar = 0.0;

  bool operator==(const BusRow&) const = default;
};

struct BranchRow {
  int from = 0;
  int to = 0;
  BreakerState status_from = BreakerState::Closed;
  BreakerState status_to = BreakerState::Closed;
  double p_mw = 0.0;    // from-end flow
  double q_mvar = 0.0;
  double loss_mw = 0.0;

  bool both_closed() const {
    return status_from == BreakerState::Closed && status_to == BreakerState::Closed;
  }
  bool operator==(const BranchRow&) const = default;
};

struct FixtureRecord {
  std::string source;
  RecordOrigin origin = RecordOrigin::PostSe;
  std::optional<double> bdd_chi2;  // chi-square value recorded with the snapshot
  std::map<std::string, std::string> meta;
  std::vector<BusRow> buses;
  std::vector<BranchRow> branches;

  const BusRow& bus(int id) const;
  BusRow& bus(int id);
  const BranchRow* find_branch(int a, int b) const;
  BranchRow* find_branch(int a, int b);

  bool operator==(const FixtureRecord&) const = default;
};

// Sectioned CSV: "# key: value" header lines, then [buses] and [branches]
// tables. See docs/fixture-format.md.
std::string record_to_csv(const FixtureRecord& record);
FixtureRecord record_from_csv(const std::string& text);
FixtureRecord load_record(const std::filesystem::path& path);
void save_record(const FixtureRecord& record, const std::filesystem::path& path);

FixtureRecord record_from_solution(const NetworkModel& model, const TopologyMatrix& topology,
                                   const PowerFlowSolution& solution, const std::string& source);

// Injections and flows evaluated at a given state (theta in radians).
FixtureRecord record_at_state(const NetworkModel& model, const TopologyMatrix& topology,
                              const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                              const std::string& source);

std::string format_number(double v);

}  // namespace gridsec
