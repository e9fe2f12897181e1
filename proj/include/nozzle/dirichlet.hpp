#pragma once

#include "nozzle/saddle.hpp"

#include <utility>
#include <vector>

namespace nozzle::fem {

/// Global dof (layout [u_r | u_z | p]) and its prescribed value.
using Constraint = std::pair<int, double>;

/// Symmetric elimination: constrained rows and columns become identity, the
/// column contributions move to the right-hand side, and the right-hand side
/// carries the prescribed value. Pressure constraints place their unit
/// diagonal in the C block. Repeated constraints must agree exactly
/// (InvalidParameter otherwise). With no constraints the system is returned
/// unchanged.
///
/// `diagonal` replaces the unit diagonal of constrained rows (the right-hand
/// side becomes diagonal * value). A power of two keeps the prescribed values
/// exact while bringing constrained rows to the scale of the others.
linalg::SaddleSystem apply_dirichlet(const linalg::SaddleSystem &system,
                                     const std::vector<Constraint> &constraints, double diagonal = 1.0);

} // namespace nozzle::fem
