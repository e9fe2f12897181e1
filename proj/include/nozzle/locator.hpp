#pragma once

#include "nozzle/mesh.hpp"

#include <array>
#include <vector>

namespace nozzle::geometry {

struct Location {
  int triangle = -1;
  /// Barycentric coordinates with respect to the triangle's vertices.
  std::array<double, 3> bary{};
};

/// Bucket grid over triangle bounding boxes. Holds a reference to the mesh,
/// which must outlive the locator.
class PointLocator {
public:
  explicit PointLocator(const AxisymMesh &mesh);

  /// Containing triangle of p; points up to `tol` metres outside the domain
  /// snap to the nearest triangle. Throws NotFound otherwise.
  Location locate(Point p, double tol = 1e-10) const;

  const AxisymMesh &mesh() const { return mesh_; }

private:
  const AxisymMesh &mesh_;
  Point lo_{}, hi_{};
  int nr_ = 1, nz_ = 1;
  double cell_r_ = 1.0, cell_z_ = 1.0;
  std::vector<int> offsets_;
  std::vector<int> items_;
};

std::array<double, 3> barycentric(const AxisymMesh &mesh, int triangle, Point p);

/// One-shot lookup; builds a locator on every call.
Location locate_point(const AxisymMesh &mesh, Point p);

} // namespace nozzle::geometry
