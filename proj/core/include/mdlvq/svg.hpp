#pragma once

#include <string>

#include "mdlvq/assignment.hpp"

namespace mdlvq {

// Figure of a 2-D index assignment: central lattice dots, sublattice points,
// K-fraction crosses, fraction-cell outlines and per-point tuple labels.
std::string assignment_svg(const IndexAssignment& asg);
void write_assignment_svg(const IndexAssignment& asg, const std::string& path);

}  // namespace mdlvq
