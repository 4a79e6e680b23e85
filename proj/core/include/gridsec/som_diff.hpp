#pragma once

#include <optional>
#include <vector>

#include "gridsec/finding.hpp"
#include "gridsec/som_solver.hpp"

namespace gridsec::som {

struct DiffOptions {
  double voltage_tolerance = 0.005;  // relative to the reference display
};

// Compares a candidate display against the reference. When a reference
// arrangement is given, the candidate's own placement constraints are also
// checked against it. Throws ModelError if the candidate names a segment the
// reference lacks.
std::vector<Finding> diff_against_reference(const std::vector<SegmentDescriptor>& reference,
                                            const std::optional<GridArrangement>& arrangement,
                                            const std::vector<SegmentDescriptor>& candidate,
                                            const DiffOptions& options = {});

}  // namespace gridsec::som
