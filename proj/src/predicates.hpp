#pragma once

// Orientation and in-circle tests. A floating-point evaluation is accepted
// when it clears a forward error bound; otherwise the determinant is
// recomputed in exact rational arithmetic.

#include "nozzle/mesh.hpp"

namespace nozzle::geometry::detail {

/// Sign of twice the signed area of (a, b, c): +1 counter-clockwise.
int orient2d(Point a, Point b, Point c);

/// +1 if d lies strictly inside the circumcircle of the counter-clockwise
/// triangle (a, b, c), 0 on it, -1 outside.
int incircle(Point a, Point b, Point c, Point d);

} // namespace nozzle::geometry::detail
