#include "nozzle/dirichlet.hpp"

#include "nozzle/error.hpp"

#include <cmath>

namespace nozzle::fem {

using linalg::CsrMatrix;
using linalg::Triplet;

linalg::SaddleSystem apply_dirichlet(const linalg::SaddleSystem &system,
                                     const std::vector<Constraint> &constraints, double diagonal) {
  system.check();
  if (!(diagonal > 0.0) || !std::isfinite(diagonal))
    fail(ErrorKind::InvalidParameter, "apply_dirichlet: diagonal must be positive");
  if (constraints.empty())
    return system;
  const int nu = system.num_velocity(), np = system.num_pressure(), n = nu + np;
  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0);
  for (const auto &[dof, v] : constraints) {
    if (dof < 0 || dof >= n)
      fail(ErrorKind::InvalidParameter, "apply_dirichlet: dof " + std::to_string(dof) + " out of range");
    if (!std::isfinite(v))
      fail(ErrorKind::InvalidParameter, "apply_dirichlet: non-finite value for dof " + std::to_string(dof));
    if (fixed[dof] && value[dof] != v)
      fail(ErrorKind::InvalidParameter,
           "apply_dirichlet: conflicting values for dof " + std::to_string(dof));
    fixed[dof] = 1;
    value[dof] = v;
  }

  linalg::SaddleSystem out;
  out.f = system.f;
  out.g = system.g;

  std::vector<Triplet> ft;
  ft.reserve(system.F.nnz());
  for (int i = 0; i < nu; ++i) {
    if (fixed[i]) {
      ft.push_back({i, i, diagonal});
      continue;
    }
    for (int k = system.F.offsets()[i]; k < system.F.offsets()[i + 1]; ++k) {
      const int j = system.F.columns()[k];
      if (fixed[j])
        out.f[i] -= system.F.values()[k] * value[j];
      else
        ft.push_back({i, j, system.F.values()[k]});
    }
  }

  std::vector<Triplet> bt;
  bt.reserve(system.B.nnz());
  for (int i = 0; i < np; ++i)
    for (int k = system.B.offsets()[i]; k < system.B.offsets()[i + 1]; ++k) {
      const int j = system.B.columns()[k];
      const double b = system.B.values()[k];
      const bool row_fixed = fixed[nu + i], col_fixed = fixed[j];
      if (!row_fixed && !col_fixed) {
        bt.push_back({i, j, b});
      } else if (row_fixed && !col_fixed) {
        out.f[j] -= b * value[nu + i];  // B^T column of the pinned pressure
      } else if (!row_fixed && col_fixed) {
        out.g[i] -= b * value[j];
      }
    }

  std::vector<Triplet> ct;
  bool any_pressure = false;
  for (int i = 0; i < np; ++i) {
    if (fixed[nu + i]) {
      ct.push_back({i, i, diagonal});
      any_pressure = true;
      continue;
    }
    if (system.C.rows() == 0)
      continue;
    for (int k = system.C.offsets()[i]; k < system.C.offsets()[i + 1]; ++k) {
      const int j = system.C.columns()[k];
      if (fixed[nu + j])
        out.g[i] -= system.C.values()[k] * value[nu + j];
      else
        ct.push_back({i, j, system.C.values()[k]});
    }
  }

  for (int i = 0; i < n; ++i)
    if (fixed[i])
      (i < nu ? out.f[i] : out.g[i - nu]) = diagonal * value[i];

  out.F = linalg::csr_from_triplets(nu, nu, ft);
  out.B = linalg::csr_from_triplets(np, nu, bt);
  if (any_pressure || system.C.rows() != 0)
    out.C = linalg::csr_from_triplets(np, np, ct);
  return out;
}

} // namespace nozzle::fem
