#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gridsec/detector.hpp"
#include "gridsec/grid_model.hpp"
#include "gridsec/power_flow.hpp"
#include "gridsec/records.hpp"

namespace gridsec {

struct BreakerOpen {
  std::vector<std::pair<int, int>> branches;
};
struct TapChange {
  int from = 0;
  int to = 0;
  double percent = 0.0;  // tap *= 1 + percent/100
};
struct LoadChange {
  int bus = 0;
  double percent = 0.0;  // P and Q load scaled together
};
struct QLimitChange {
  int bus = 0;
  double q_max_delta_mvar = 0.0;
};
struct SwingShift {
  int bus = 0;  // new slack
};

using Contingency = std::variant<BreakerOpen, TapChange, LoadChange, QLimitChange, SwingShift>;

std::string describe(const Contingency& c);

struct ScenarioSpec {
  std::string id;  // "S01" .. "S30"
  std::string description;
  std::vector<Contingency> actions;  // more than one = composite
  std::optional<DetectionClass> expected_class;

  bool composite() const { return actions.size() > 1; }
};

// The 30 contingency cases used as normal operating data.
const std::vector<ScenarioSpec>& scenario_catalog();
const ScenarioSpec& find_scenario(const std::string& id);

// Throws ModelError when the contingency names an element the model lacks.
NetworkModel apply_contingency(const NetworkModel& model, const Contingency& c);

struct ScenarioOutcome {
  ScenarioSpec spec;
  std::optional<NetworkModel> model;
  std::optional<TopologyMatrix> topology;
  std::optional<PowerFlowSolution> solution;
  std::optional<FixtureRecord> record;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

// Never throws for a bad or non-convergent contingency; the outcome says why.
ScenarioOutcome generate_scenario(const NetworkModel& model, const ScenarioSpec& spec,
                                  const PowerFlowOptions& options = {});

// Runs specs on a worker pool; results sorted by id.
std::vector<ScenarioOutcome> run_scenarios(const NetworkModel& model, const std::vector<ScenarioSpec>& specs,
                                           unsigned workers = 0, const PowerFlowOptions& options = {});

}  // namespace gridsec
