#pragma once

#include <filesystem>
#include <string>

#include "gridsec/grid_model.hpp"

namespace gridsec {

// JSON case format, see docs/case-format.md.
std::string model_to_json(const NetworkModel& model);
NetworkModel model_from_json(const std::string& text);

NetworkModel load_case_file(const std::filesystem::path& path);
void save_case_file(const NetworkModel& model, const std::filesystem::path& path);

}  // namespace gridsec
