#include "nozzle/assembly.hpp"

#include "nozzle/error.hpp"
#include "nozzle/quadrature.hpp"
#include "nozzle/reference_element.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nozzle::fem {

using linalg::Triplet;

ElementFrame::ElementFrame(const AxisymMesh &mesh, std::size_t t) {
  const auto &tri = mesh.triangles[t];
  a = mesh.vertices[tri[0]];
  b = mesh.vertices[tri[1]];
  c = mesh.vertices[tri[2]];
  det = (b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z);
  dxi_dr = (c.z - a.z) / det;
  dxi_dz = -(c.r - a.r) / det;
  deta_dr = -(b.z - a.z) / det;
  deta_dz = (b.r - a.r) / det;
}

namespace {

/// Reference tables for one element type at the space's quadrature rule.
struct Tables {
  QuadratureRule rule;
  BasisTable table;
  int n = 0;

  Tables(int degree, int exactness)
      : rule(quadrature_rule(exactness)),
        table(reference_element(degree).tabulate(rule.points)),
        n(reference_element(degree).num_nodes()) {}
};

struct QuadPoint {
  double weight;  // includes the Jacobian determinant but not r
  double r;
  Point x;
};

/// Physical gradients of all basis functions at quadrature point q.
void physical_gradients(const ElementFrame &frame, const Tables &tab, std::size_t q,
                        std::vector<std::array<double, 2>> &out) {
  out.resize(tab.n);
  for (int i = 0; i < tab.n; ++i)
    out[i] = frame.physical_gradient(tab.table.gradients[q][i]);
}

QuadPoint quad_point(const ElementFrame &frame, const Tables &tab, std::size_t q) {
  const auto &l = tab.rule.points[q];
  const Point x = frame.map(l[1], l[2]);
  return {tab.rule.weights[q] * frame.det, x.r, x};
}

void check_velocity_field(const FunctionSpace &space, const Field &w) {
  if (&w.space() != &space &&
      (w.space().mesh_ptr() != space.mesh_ptr() ||
       w.space().velocity_degree() != space.velocity_degree()))
    fail(ErrorKind::InvalidParameter, "transport field is defined on a different space");
}

/// Transport velocity (w_r, w_z) at each quadrature point of triangle t.
void transport_at_points(const FunctionSpace &space, const Field &w, const Tables &vel,
                         std::size_t t, std::vector<std::array<double, 2>> &out) {
  const auto dofs = space.velocity().cell_dofs(t);
  const auto &c = w.coefficients();
  out.assign(vel.rule.size(), {0.0, 0.0});
  for (std::size_t q = 0; q < vel.rule.size(); ++q)
    for (int i = 0; i < vel.n; ++i) {
      out[q][0] += vel.table.values[q][i] * c[space.ur_dof(dofs[i])];
      out[q][1] += vel.table.values[q][i] * c[space.uz_dof(dofs[i])];
    }
}

CsrMatrix finish(int rows, int cols, const std::vector<Triplet> &triplets) {
  return linalg::csr_from_triplets(rows, cols, triplets);
}

} // namespace

CsrMatrix assemble_viscous_block(const FunctionSpace &space, double viscosity) {
  if (!(viscosity > 0.0))
    fail(ErrorKind::InvalidParameter, "viscosity must be positive");
  const Tables vel(space.velocity_degree(), space.quadrature_degree());
  const int nu = space.num_scalar_velocity();
  std::vector<Triplet> triplets;
  triplets.reserve(space.mesh().num_triangles() * vel.n * vel.n * 2);
  std::vector<std::array<double, 2>> grads;
  std::vector<double> stiff(vel.n * vel.n), hoop(vel.n * vel.n);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementFrame frame(space.mesh(), t);
    std::fill(stiff.begin(), stiff.end(), 0.0);
    std::fill(hoop.begin(), hoop.end(), 0.0);
    for (std::size_t q = 0; q < vel.rule.size(); ++q) {
      const QuadPoint qp = quad_point(frame, vel, q);
      physical_gradients(frame, vel, q, grads);
      const auto &phi = vel.table.values[q];
      for (int i = 0; i < vel.n; ++i)
        for (int j = 0; j < vel.n; ++j) {
          stiff[i * vel.n + j] += qp.weight * qp.r *
                                  (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
          hoop[i * vel.n + j] += qp.weight * phi[i] * phi[j] / qp.r;
        }
    }
    const auto dofs = space.velocity().cell_dofs(t);
    for (int i = 0; i < vel.n; ++i)
      for (int j = 0; j < vel.n; ++j) {
        const double k = viscosity * stiff[i * vel.n + j];
        triplets.push_back({dofs[i], dofs[j], k + viscosity * hoop[i * vel.n + j]});
        triplets.push_back({nu + dofs[i], nu + dofs[j], k});
      }
  }
  return finish(space.num_velocity(), space.num_velocity(), triplets);
}

CsrMatrix assemble_divergence_block(const FunctionSpace &space) {
  const Tables vel(space.velocity_degree(), space.quadrature_degree());
  const Tables pre(space.pressure_degree(), space.quadrature_degree());
  const int nu = space.num_scalar_velocity();
  std::vector<Triplet> triplets;
  triplets.reserve(space.mesh().num_triangles() * vel.n * pre.n * 2);
  std::vector<std::array<double, 2>> grads;
  std::vector<double> br(pre.n * vel.n), bz(pre.n * vel.n);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementFrame frame(space.mesh(), t);
    std::fill(br.begin(), br.end(), 0.0);
    std::fill(bz.begin(), bz.end(), 0.0);
    for (std::size_t q = 0; q < vel.rule.size(); ++q) {
      const QuadPoint qp = quad_point(frame, vel, q);
      physical_gradients(frame, vel, q, grads);
      const auto &phi = vel.table.values[q];
      const auto &psi = pre.table.values[q];
      for (int i = 0; i < pre.n; ++i)
        for (int j = 0; j < vel.n; ++j) {
          br[i * vel.n + j] -= qp.weight * psi[i] * (qp.r * grads[j][0] + phi[j]);
          bz[i * vel.n + j] -= qp.weight * psi[i] * qp.r * grads[j][1];
        }
    }
    const auto pdofs = space.pressure().cell_dofs(t);
    const auto vdofs = space.velocity().cell_dofs(t);
    for (int i = 0; i < pre.n; ++i)
      for (int j = 0; j < vel.n; ++j) {
        triplets.push_back({pdofs[i], vdofs[j], br[i * vel.n + j]});
        triplets.push_back({pdofs[i], nu + vdofs[j], bz[i * vel.n + j]});
      }
  }
  return finish(space.num_pressure(), space.num_velocity(), triplets);
}

CsrMatrix assemble_mass(const FunctionSpace &space, MassKind which, double rho) {
  const bool velocity = which == MassKind::Velocity;
  if (!velocity && which != MassKind::Pressure)
    fail(ErrorKind::InvalidParameter, "assemble_mass: unknown field selector");
  if (velocity && !(rho > 0.0))
    fail(ErrorKind::InvalidParameter, "assemble_mass: density must be positive");
  const int degree = velocity ? space.velocity_degree() : space.pressure_degree();
  const DofMap &map = velocity ? space.velocity() : space.pressure();
  const double scale = velocity ? rho : 1.0;
  const Tables tab(degree, space.quadrature_degree());
  const int n_scalar = map.num_dofs();
  std::vector<Triplet> triplets;
  std::vector<double> local(tab.n * tab.n);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementFrame frame(space.mesh(), t);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < tab.rule.size(); ++q) {
      const QuadPoint qp = quad_point(frame, tab, q);
      const auto &phi = tab.table.values[q];
      for (int i = 0; i < tab.n; ++i)
        for (int j = 0; j < tab.n; ++j)
          local[i * tab.n + j] += qp.weight * qp.r * phi[i] * phi[j];
    }
    const auto dofs = map.cell_dofs(t);
    for (int i = 0; i < tab.n; ++i)
      for (int j = 0; j < tab.n; ++j) {
        const double m = scale * local[i * tab.n + j];
        triplets.push_back({dofs[i], dofs[j], m});
        if (velocity)
          triplets.push_back({n_scalar + dofs[i], n_scalar + dofs[j], m});
      }
  }
  const int n = velocity ? 2 * n_scalar : n_scalar;
  return finish(n, n, triplets);
}

CsrMatrix assemble_convection(const FunctionSpace &space, const Field &w, double rho) {
  check_velocity_field(space, w);
  const int k = space.velocity_degree();
  const Tables vel(k, std::max(space.quadrature_degree(), 3 * k));
  const int nu = space.num_scalar_velocity();
  std::vector<Triplet> triplets;
  triplets.reserve(space.mesh().num_triangles() * vel.n * vel.n * 2);
  std::vector<std::array<double, 2>> grads, wq;
  std::vector<double> local(vel.n * vel.n);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementFrame frame(space.mesh(), t);
    transport_at_points(space, w, vel, t, wq);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < vel.rule.size(); ++q) {
      const QuadPoint qp = quad_point(frame, vel, q);
      physical_gradients(frame, vel, q, grads);
      const auto &phi = vel.table.values[q];
      for (int j = 0; j < vel.n; ++j) {
        const double adv = wq[q][0] * grads[j][0] + wq[q][1] * grads[j][1];
        for (int i = 0; i < vel.n; ++i)
          local[i * vel.n + j] += qp.weight * qp.r * adv * phi[i];
      }
    }
    const auto dofs = space.velocity().cell_dofs(t);
    for (int i = 0; i < vel.n; ++i)
      for (int j = 0; j < vel.n; ++j) {
        const double v = rho * local[i * vel.n + j];
        triplets.push_back({dofs[i], dofs[j], v});
        triplets.push_back({nu + dofs[i], nu + dofs[j], v});
      }
  }
  return finish(space.num_velocity(), space.num_velocity(), triplets);
}

CsrMatrix assemble_pressure_laplacian(const FunctionSpace &space) {
  const Tables pre(space.pressure_degree(), space.quadrature_degree());
  std::vector<Triplet> triplets;
  std::vector<std::array<double, 2>> grads;
  std::vector<double> local(pre.n * pre.n);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementFrame frame(space.mesh(), t);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < pre.rule.size(); ++q) {
      const QuadPoint qp = quad_point(frame, pre, q);
      physical_gradients(frame, pre, q, grads);
      for (int i = 0; i < pre.n; ++i)
        for (int j = 0; j < pre.n; ++j)
          local[i * pre.n + j] +=
              qp.weight * qp.r * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
    }
    const auto dofs = space.pressure().cell_dofs(t);
    for (int i = 0; i < pre.n; ++i)
      for (int j = 0; j < pre.n; ++j)
        triplets.push_back({dofs[i], dofs[j], local[i * pre.n + j]});
  }
  return finish(space.num_pressure(), space.num_pressure(), triplets);
}

CsrMatrix assemble_pressure_convection(const FunctionSpace &space, const Field &w, double rho) {
  check_velocity_field(space, w);
  const Tables vel(space.velocity_degree(), space.quadrature_degree());
  const Tables pre(space.pressure_degree(), space.quadrature_degree());
  std::vector<Triplet> triplets;
  std::vector<std::array<double, 2>> grads, wq;
  std::vector<double> local(pre.n * pre.n);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementFrame frame(space.mesh(), t);
    transport_at_points(space, w, vel, t, wq);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < pre.rule.size(); ++q) {
      const QuadPoint qp = quad_point(frame, pre, q);
      physical_gradients(frame, pre, q, grads);
      const auto &psi = pre.table.values[q];
      for (int j = 0; j < pre.n; ++j) {
        const double adv = wq[q][0] * grads[j][0] + wq[q][1] * grads[j][1];
        for (int i = 0; i < pre.n; ++i)
          local[i * pre.n + j] += qp.weight * qp.r * adv * psi[i];
      }
    }
    const auto dofs = space.pressure().cell_dofs(t);
    for (int i = 0; i < pre.n; ++i)
      for (int j = 0; j < pre.n; ++j)
        triplets.push_back({dofs[i], dofs[j], rho * local[i * pre.n + j]});
  }
  return finish(space.num_pressure(), space.num_pressure(), triplets);
}

namespace {

struct EdgeOwner {
  std::size_t triangle;
  int local_edge;  // edge from local vertex e to e + 1
};

/// Owning triangle of every boundary edge with the given tag.
std::vector<EdgeOwner> boundary_owners(const AxisymMesh &mesh, BoundaryTag tag) {
  std::map<std::pair<int, int>, EdgeOwner> lookup;
  for (const auto &be : mesh.boundary_edges)
    if (be.tag == tag)
      lookup.emplace(std::minmax(be.a, be.b), EdgeOwner{0, -1});
  for (std::size_t t = 0; t < mesh.num_triangles() && !lookup.empty(); ++t) {
    const auto &tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const auto it = lookup.find(std::minmax(tri[e], tri[(e + 1) % 3]));
      if (it != lookup.end())
        it->second = {t, e};
    }
  }
  std::vector<EdgeOwner> owners;
  for (const auto &[key, owner] : lookup)
    owners.push_back(owner);
  return owners;
}

/// Reference coordinates of a point at parameter s along local edge e.
std::array<double, 2> edge_reference_point(int e, double s) {
  static constexpr std::array<std::array<double, 2>, 3> v{{{0, 0}, {1, 0}, {0, 1}}};
  const auto a = v[e], b = v[(e + 1) % 3];
  return {a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])};
}

} // namespace

CsrMatrix assemble_pressure_robin(const FunctionSpace &space, const Field &w, double rho,
                                  BoundaryTag tag) {
  check_velocity_field(space, w);
  const auto &mesh = space.mesh();
  const auto &vref = reference_element(space.velocity_degree());
  const auto &pref = reference_element(space.pressure_degree());
  const LineRule line = gauss_legendre(space.velocity_degree() + 2);
  std::vector<Triplet> triplets;
  std::vector<double> phi(vref.num_nodes()), psi(pref.num_nodes());
  for (const auto &owner : boundary_owners(mesh, tag)) {
    const ElementFrame frame(mesh, owner.triangle);
    const auto &tri = mesh.triangles[owner.triangle];
    const Point a = mesh.vertices[tri[owner.local_edge]];
    const Point b = mesh.vertices[tri[(owner.local_edge + 1) % 3]];
    const double len = std::hypot(b.r - a.r, b.z - a.z);
    const std::array<double, 2> normal{(b.z - a.z) / len, -(b.r - a.r) / len};
    const auto vdofs = space.velocity().cell_dofs(owner.triangle);
    const auto pdofs = space.pressure().cell_dofs(owner.triangle);
    const auto &c = w.coefficients();
    for (std::size_t q = 0; q < line.points.size(); ++q) {
      const auto [xi, eta] = edge_reference_point(owner.local_edge, line.points[q]);
      const Point x = frame.map(xi, eta);
      vref.evaluate(xi, eta, phi);
      pref.evaluate(xi, eta, psi);
      double wn = 0.0;
      for (int i = 0; i < vref.num_nodes(); ++i)
        wn += phi[i] * (c[space.ur_dof(vdofs[i])] * normal[0] + c[space.uz_dof(vdofs[i])] * normal[1]);
      const double weight = -rho * wn * line.weights[q] * len * x.r;
      for (int i = 0; i < pref.num_nodes(); ++i)
        for (int j = 0; j < pref.num_nodes(); ++j)
          if (psi[i] != 0.0 && psi[j] != 0.0)
            triplets.push_back({pdofs[i], pdofs[j], weight * psi[i] * psi[j]});
    }
  }
  return finish(space.num_pressure(), space.num_pressure(), triplets);
}

Vector assemble_body_force(const FunctionSpace &space, const VectorFunction &force) {
  const Tables vel(space.velocity_degree(), space.quadrature_degree());
  const int nu = space.num_scalar_velocity();
  Vector out(space.num_velocity(), 0.0);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const ElementFrame frame(space.mesh(), t);
    const auto dofs = space.velocity().cell_dofs(t);
    for (std::size_t q = 0; q < vel.rule.size(); ++q) {
      const QuadPoint qp = quad_point(frame, vel, q);
      const auto f = force(qp.x);
      for (int i = 0; i < vel.n; ++i) {
        const double wphi = qp.weight * qp.r * vel.table.values[q][i];
        out[dofs[i]] += wphi * f[0];
        out[nu + dofs[i]] += wphi * f[1];
      }
    }
  }
  return out;
}

Vector assemble_traction(const FunctionSpace &space, BoundaryTag tag,
                         const VectorFunction &traction) {
  const auto &mesh = space.mesh();
  const auto &vref = reference_element(space.velocity_degree());
  const LineRule line = gauss_legendre(space.velocity_degree() + 4);
  const int nu = space.num_scalar_velocity();
  Vector out(space.num_velocity(), 0.0);
  std::vector<double> phi(vref.num_nodes());
  for (const auto &owner : boundary_owners(mesh, tag)) {
    const ElementFrame frame(mesh, owner.triangle);
    const auto &tri = mesh.triangles[owner.triangle];
    const Point a = mesh.vertices[tri[owner.local_edge]];
    const Point b = mesh.vertices[tri[(owner.local_edge + 1) % 3]];
    const double len = std::hypot(b.r - a.r, b.z - a.z);
    const auto dofs = space.velocity().cell_dofs(owner.triangle);
    for (std::size_t q = 0; q < line.points.size(); ++q) {
      const auto [xi, eta] = edge_reference_point(owner.local_edge, line.points[q]);
      const Point x = frame.map(xi, eta);
      vref.evaluate(xi, eta, phi);
      const auto tr = traction(x);
      for (int i = 0; i < vref.num_nodes(); ++i) {
        const double wphi = line.weights[q] * len * x.r * phi[i];
        out[dofs[i]] += wphi * tr[0];
        out[nu + dofs[i]] += wphi * tr[1];
      }
    }
  }
  return out;
}

} // namespace nozzle::fem
