#pragma once

#include "nozzle/locator.hpp"
#include "nozzle/mesh.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace nozzle::fem {

using geometry::AxisymMesh;
using geometry::BoundaryTag;
using geometry::Point;

/// Continuous Lagrange degree-of-freedom numbering for one scalar field:
/// vertex dofs first (index = vertex id), then (k - 1) dofs per unique edge
/// ordered from the lower to the higher vertex index, then interior dofs.
class DofMap {
public:
  DofMap(const AxisymMesh &mesh, int degree);

  int degree() const { return degree_; }
  int num_dofs() const { return num_dofs_; }
  int dofs_per_cell() const { return static_cast<int>(cell_dofs_.empty() ? 0 : cell_dofs_[0].size()); }
  std::span<const int> cell_dofs(std::size_t t) const { return cell_dofs_[t]; }
  const Point &dof_point(int dof) const { return points_[dof]; }
  const std::vector<Point> &dof_points() const { return points_; }

  /// Sorted dofs lying on boundary edges with the given tag.
  const std::vector<int> &boundary_dofs(BoundaryTag tag) const;

private:
  int degree_;
  int num_dofs_ = 0;
  std::vector<std::vector<int>> cell_dofs_;
  std::vector<Point> points_;
  std::map<BoundaryTag, std::vector<int>> boundary_;
};

/// Generalized Taylor-Hood pair: velocity P_{N+1} for (u_r, u_z), pressure
/// P_N. Global layout: [u_r | u_z | p].
class FunctionSpace {
public:
  FunctionSpace(std::shared_ptr<const AxisymMesh> mesh, int pressure_degree);

  const AxisymMesh &mesh() const { return *mesh_; }
  std::shared_ptr<const AxisymMesh> mesh_ptr() const { return mesh_; }
  const geometry::PointLocator &locator() const { return *locator_; }

  int order() const { return pressure_.degree(); }
  int velocity_degree() const { return velocity_.degree(); }
  int pressure_degree() const { return pressure_.degree(); }
  const DofMap &velocity() const { return velocity_; }
  const DofMap &pressure() const { return pressure_; }

  int num_scalar_velocity() const { return velocity_.num_dofs(); }
  int num_velocity() const { return 2 * velocity_.num_dofs(); }
  int num_pressure() const { return pressure_.num_dofs(); }
  int num_total() const { return num_velocity() + num_pressure(); }

  int ur_dof(int scalar) const { return scalar; }
  int uz_dof(int scalar) const { return velocity_.num_dofs() + scalar; }
  int p_dof(int scalar) const { return num_velocity() + scalar; }

  /// Quadrature exactness used by every assembled block: 2 k_u + 2.
  int quadrature_degree() const { return 2 * velocity_degree() + 2; }

private:
  std::shared_ptr<const AxisymMesh> mesh_;
  std::unique_ptr<geometry::PointLocator> locator_;
  DofMap velocity_;
  DofMap pressure_;
};

struct FlowValue {
  double ur = 0.0;
  double uz = 0.0;
  double p = 0.0;
};

/// Coefficient vector on a FunctionSpace (velocity block then pressure block).
class Field {
public:
  explicit Field(std::shared_ptr<const FunctionSpace> space);
  Field(std::shared_ptr<const FunctionSpace> space, std::vector<double> coefficients);

  const FunctionSpace &space() const { return *space_; }
  std::shared_ptr<const FunctionSpace> space_ptr() const { return space_; }
  std::vector<double> &coefficients() { return coeffs_; }
  const std::vector<double> &coefficients() const { return coeffs_; }
  std::span<const double> velocity() const;
  std::span<const double> pressure() const;

private:
  std::shared_ptr<const FunctionSpace> space_;
  std::vector<double> coeffs_;
};

using FlowFunction = std::function<FlowValue(Point)>;

/// Nodal interpolant of (u_r, u_z, p).
Field interpolate(std::shared_ptr<const FunctionSpace> space, const FlowFunction &f);

/// Values at a point; throws NotFound outside the domain.
FlowValue evaluate_field(const Field &field, Point point);

/// Evaluation at a known triangle / barycentric location.
FlowValue evaluate_field(const Field &field, const geometry::Location &where);

} // namespace nozzle::fem
