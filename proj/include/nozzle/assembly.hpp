#pragma once

#include "nozzle/csr.hpp"
#include "nozzle/function_space.hpp"

#include <array>
#include <functional>

namespace nozzle::fem {

using linalg::CsrMatrix;
using linalg::Vector;

// Every operator is integrated on the meridian plane with the measure
// r dr dz (the azimuthal 2 pi is omitted). Velocity operators act on the
// [u_r | u_z] block of size num_velocity().

/// mu * (grad u : grad v) r + mu * u_r v_r / r.
CsrMatrix assemble_viscous_block(const FunctionSpace &space, double viscosity);

/// B(q, u) = -(q, d(r u_r)/dr + r du_z/dz) over dr dz; pressure rows,
/// velocity columns.
CsrMatrix assemble_divergence_block(const FunctionSpace &space);

enum class MassKind { Velocity, Pressure };

/// Velocity mass is scaled by rho on both components; pressure mass ignores rho.
CsrMatrix assemble_mass(const FunctionSpace &space, MassKind which, double rho = 1.0);

/// rho ((w . grad) u) . v r with the transport field w taken from a Field on
/// the same space.
CsrMatrix assemble_convection(const FunctionSpace &space, const Field &w, double rho);

/// Pressure-space operators for the PCD Schur approximation.
CsrMatrix assemble_pressure_laplacian(const FunctionSpace &space);
CsrMatrix assemble_pressure_convection(const FunctionSpace &space, const Field &w, double rho);
/// -rho (w . n) p q r ds over the edges carrying `tag`.
CsrMatrix assemble_pressure_robin(const FunctionSpace &space, const Field &w, double rho,
                                  BoundaryTag tag);

using VectorFunction = std::function<std::array<double, 2>(Point)>;

/// (f, v) r dr dz for a body force (f_r, f_z).
Vector assemble_body_force(const FunctionSpace &space, const VectorFunction &force);

/// (t, v) r ds over the edges carrying `tag`, for a prescribed traction.
Vector assemble_traction(const FunctionSpace &space, BoundaryTag tag,
                         const VectorFunction &traction);

/// Geometric data of an affine triangle.
struct ElementFrame {
  Point a, b, c;
  double det = 0.0;
  // Entries of the inverse Jacobian: d(xi, eta) / d(r, z).
  double dxi_dr = 0.0, dxi_dz = 0.0, deta_dr = 0.0, deta_dz = 0.0;

  ElementFrame(const AxisymMesh &mesh, std::size_t t);
  Point map(double xi, double eta) const {
    return {a.r + xi * (b.r - a.r) + eta * (c.r - a.r), a.z + xi * (b.z - a.z) + eta * (c.z - a.z)};
  }
  std::array<double, 2> physical_gradient(const std::array<double, 2> &g) const {
    return {g[0] * dxi_dr + g[1] * deta_dr, g[0] * dxi_dz + g[1] * deta_dz};
  }
};

} // namespace nozzle::fem
