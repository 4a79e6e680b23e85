#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gridsec/features.hpp"
#include "gridsec/pipeline.hpp"
#include "gridsec/som_diff.hpp"
#include "gridsec/som_solver.hpp"
#include "gridsec/stealth_sweep.hpp"

namespace gridsec::cli {

// Everything the config file can set. See docs/config-format.md.
struct HarnessConfig {
  PipelineOptions pipeline;
  SweepOptions sweep;
  BaselineOptions features;
  som::DiffOptions som_diff;
  std::size_t som_max_solutions = 100000;
  double scenario_1b_noise = 0.005;
  unsigned workers = 0;
  std::uint64_t seed = 42;
};

// [section] key = value; unknown sections or keys are errors.
HarnessConfig parse_config(const std::string& text);
HarnessConfig load_config(const std::filesystem::path& path);
void apply_paper_compat(HarnessConfig& config);

}  // namespace gridsec::cli
