#include "nozzle/function_space.hpp"

#include "nozzle/error.hpp"
#include "nozzle/reference_element.hpp"

#include <algorithm>

namespace nozzle::fem {

DofMap::DofMap(const AxisymMesh &mesh, int degree) : degree_(degree) {
  const ReferenceElement &ref = reference_element(degree);
  const int nv = static_cast<int>(mesh.num_vertices());
  const auto edges = geometry::unique_edges(mesh);
  const int per_edge = degree - 1;
  const int per_cell = degree == 3 ? 1 : 0;
  const int ne = static_cast<int>(edges.size());
  num_dofs_ = nv + per_edge * ne + per_cell * static_cast<int>(mesh.num_triangles());

  // Vertex -> (neighbour, edge id) adjacency for edge lookup.
  std::vector<int> start(nv + 1, 0);
  for (const auto &e : edges)
    ++start[e[0] + 1];
  for (int v = 0; v < nv; ++v)
    start[v + 1] += start[v];
  std::vector<std::pair<int, int>> adj(edges.size());
  {
    std::vector<int> fill(start.begin(), start.end() - 1);
    for (int e = 0; e < ne; ++e)
      adj[fill[edges[e][0]]++] = {edges[e][1], e};
  }
  auto edge_id = [&](int a, int b) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    for (int k = start[lo]; k < start[lo + 1]; ++k)
      if (adj[k].first == hi)
        return adj[k].second;
    fail(ErrorKind::InvalidInput, "DofMap: edge missing from mesh");
  };

  points_.resize(num_dofs_);
  for (int v = 0; v < nv; ++v)
    points_[v] = mesh.vertices[v];

  cell_dofs_.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto &tri = mesh.triangles[t];
    auto &dofs = cell_dofs_[t];
    dofs.resize(ref.num_nodes());
    for (int i = 0; i < 3; ++i)
      dofs[i] = tri[i];
    for (int e = 0; e < 3; ++e) {
      const int ga = tri[e], gb = tri[(e + 1) % 3];
      const int base = nv + per_edge * edge_id(ga, gb);
      for (int j = 1; j <= per_edge; ++j) {
        const int global = ga < gb ? base + (j - 1) : base + (per_edge - j);
        dofs[3 + e * per_edge + (j - 1)] = global;
      }
    }
    if (per_cell)
      dofs[3 + 3 * per_edge] = nv + per_edge * ne + static_cast<int>(t);

    const Point a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    for (int i = 3; i < ref.num_nodes(); ++i) {
      const auto [xi, eta] = ref.nodes()[i];
      points_[dofs[i]] = {a.r + xi * (b.r - a.r) + eta * (c.r - a.r),
                          a.z + xi * (b.z - a.z) + eta * (c.z - a.z)};
    }
  }

  for (BoundaryTag tag : geometry::kAllBoundaryTags)
    boundary_[tag];
  for (const auto &be : mesh.boundary_edges) {
    auto &list = boundary_[be.tag];
    list.push_back(be.a);
    list.push_back(be.b);
    const int base = nv + per_edge * edge_id(be.a, be.b);
    for (int j = 0; j < per_edge; ++j)
      list.push_back(base + j);
  }
  for (auto &[tag, list] : boundary_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

const std::vector<int> &DofMap::boundary_dofs(BoundaryTag tag) const {
  return boundary_.at(tag);
}

namespace {

std::shared_ptr<const AxisymMesh> non_null(std::shared_ptr<const AxisymMesh> mesh) {
  if (!mesh)
    fail(ErrorKind::InvalidParameter, "FunctionSpace: null mesh");
  return mesh;
}

int velocity_degree_for(int pressure_degree) {
  if (pressure_degree < 1 || pressure_degree > 2)
    fail(ErrorKind::InvalidParameter, "Taylor-Hood order N must be 1 or 2");
  return pressure_degree + 1;
}

} // namespace

FunctionSpace::FunctionSpace(std::shared_ptr<const AxisymMesh> mesh, int pressure_degree)
    : mesh_(non_null(std::move(mesh))),
      locator_(std::make_unique<geometry::PointLocator>(*mesh_)),
      velocity_(*mesh_, velocity_degree_for(pressure_degree)),
      pressure_(*mesh_, pressure_degree) {}

Field::Field(std::shared_ptr<const FunctionSpace> space)
    : space_(std::move(space)), coeffs_(space_->num_total(), 0.0) {}

Field::Field(std::shared_ptr<const FunctionSpace> space, std::vector<double> coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != static_cast<std::size_t>(space_->num_total()))
    fail(ErrorKind::InvalidParameter, "Field: coefficient count does not match the space");
}

std::span<const double> Field::velocity() const {
  return std::span<const double>(coeffs_).first(space_->num_velocity());
}

std::span<const double> Field::pressure() const {
  return std::span<const double>(coeffs_).subspan(space_->num_velocity());
}

Field interpolate(std::shared_ptr<const FunctionSpace> space, const FlowFunction &f) {
  Field field(space);
  auto &c = field.coefficients();
  const auto &vel = space->velocity();
  for (int i = 0; i < vel.num_dofs(); ++i) {
    const FlowValue v = f(vel.dof_point(i));
    c[space->ur_dof(i)] = v.ur;
    c[space->uz_dof(i)] = v.uz;
  }
  const auto &pre = space->pressure();
  for (int i = 0; i < pre.num_dofs(); ++i)
    c[space->p_dof(i)] = f(pre.dof_point(i)).p;
  return field;
}

FlowValue evaluate_field(const Field &field, const geometry::Location &where) {
  const FunctionSpace &space = field.space();
  const double xi = where.bary[1], eta = where.bary[2];
  const auto &c = field.coefficients();
  FlowValue out;
  {
    const auto &ref = reference_element(space.velocity_degree());
    std::array<double, 10> phi{};
    ref.evaluate(xi, eta, std::span<double>(phi.data(), ref.num_nodes()));
    const auto dofs = space.velocity().cell_dofs(where.triangle);
    for (int i = 0; i < ref.num_nodes(); ++i) {
      out.ur += phi[i] * c[space.ur_dof(dofs[i])];
      out.uz += phi[i] * c[space.uz_dof(dofs[i])];
    }
  }
  {
    const auto &ref = reference_element(space.pressure_degree());
    std::array<double, 10> phi{};
    ref.evaluate(xi, eta, std::span<double>(phi.data(), ref.num_nodes()));
    const auto dofs = space.pressure().cell_dofs(where.triangle);
    for (int i = 0; i < ref.num_nodes(); ++i)
      out.p += phi[i] * c[space.p_dof(dofs[i])];
  }
  return out;
}

FlowValue evaluate_field(const Field &field, Point point) {
  return evaluate_field(field, field.space().locator().locate(point));
}

} // namespace nozzle::fem
