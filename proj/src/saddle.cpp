#include "nozzle/saddle.hpp"

#include "nozzle/assembly.hpp"
#include "nozzle/error.hpp"

#include <algorithm>

namespace nozzle::linalg {

void SaddleSystem::check() const {
  const int nu = F.rows(), np = B.rows();
  if (F.cols() != nu)
    fail(ErrorKind::InvalidParameter, "saddle system: F is not square");
  if (B.cols() != nu)
    fail(ErrorKind::InvalidParameter, "saddle system: B columns do not match the velocity size");
  if (static_cast<int>(f.size()) != nu || static_cast<int>(g.size()) != np)
    fail(ErrorKind::InvalidParameter, "saddle system: right-hand side size mismatch");
  if (C.rows() != 0 && (C.rows() != np || C.cols() != np))
    fail(ErrorKind::InvalidParameter, "saddle system: C block shape mismatch");
}

CsrMatrix SaddleSystem::monolithic() const {
  check();
  const CsrMatrix bt = B.transpose();
  if (C.rows() == 0) {
    const CsrMatrix zero(B.rows(), B.rows());
    return block_matrix(F, bt, B, &zero);
  }
  return block_matrix(F, bt, B, &C);
}

Vector SaddleSystem::rhs() const {
  Vector r(f);
  r.insert(r.end(), g.begin(), g.end());
  return r;
}

void SaddleSystem::apply(std::span<const double> x, std::span<double> y) const {
  const int nu = num_velocity(), np = num_pressure();
  const auto u = x.first(nu), p = x.subspan(nu, np);
  auto yu = y.first(nu), yp = y.subspan(nu, np);
  F.multiply(u, yu);
  Vector btp(nu);
  B.multiply_transpose(p, btp);
  for (int i = 0; i < nu; ++i)
    yu[i] += btp[i];
  B.multiply(u, yp);
  if (C.rows() != 0)
    C.multiply_add(p, yp);
}

std::string_view to_string(PcdBoundaryMode mode) {
  return mode == PcdBoundaryMode::InflowRobin ? "inflow-robin" : "outflow-dirichlet";
}

PcdBoundaryMode pcd_mode_from_string(std::string_view name) {
  if (name == "outflow-dirichlet")
    return PcdBoundaryMode::OutflowDirichlet;
  if (name == "inflow-robin")
    return PcdBoundaryMode::InflowRobin;
  fail(ErrorKind::InvalidParameter, "unknown PCD boundary mode '" + std::string(name) +
                                        "' (expected outflow-dirichlet or inflow-robin)");
}

void PcdOperator::apply_schur_inverse(std::span<const double> r, std::span<double> q) const {
  Vector z(r.size()), fz(r.size());
  Mp_lu.solve(r, z);
  Fp.multiply(z, fz);
  Ap_lu.solve(fz, q);
}

namespace {

/// Keeps only the diagonal entry on the rows and columns flagged in `mask`.
CsrMatrix pin_rows_and_columns(const CsrMatrix &a, const std::vector<char> &mask) {
  std::vector<Triplet> triplets;
  triplets.reserve(a.nnz());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.offsets()[i]; k < a.offsets()[i + 1]; ++k) {
      const int j = a.columns()[k];
      if ((mask[i] || mask[j]) && i != j)
        continue;
      triplets.push_back({i, j, a.values()[k]});
    }
  return csr_from_triplets(a.rows(), a.cols(), triplets);
}

} // namespace

PcdOperator build_pcd(const fem::FunctionSpace &space, double viscosity, double density,
                      const fem::Field &w, PcdBoundaryMode mode, double time_coefficient) {
  if (mode != PcdBoundaryMode::OutflowDirichlet && mode != PcdBoundaryMode::InflowRobin)
    fail(ErrorKind::InvalidParameter, "build_pcd: invalid boundary mode");
  if (!(viscosity > 0.0) || !(density > 0.0) || time_coefficient < 0.0)
    fail(ErrorKind::InvalidParameter, "build_pcd: viscosity and density must be positive");
  PcdOperator pcd;
  pcd.mode = mode;
  pcd.Mp = fem::assemble_mass(space, fem::MassKind::Pressure);
  const CsrMatrix laplacian = fem::assemble_pressure_laplacian(space);
  CsrMatrix fp = laplacian.scaled(viscosity).add(fem::assemble_pressure_convection(space, w, density));
  if (time_coefficient > 0.0)
    fp = fp.add(pcd.Mp, time_coefficient * density);
  if (mode == PcdBoundaryMode::InflowRobin)
    fp = fp.add(fem::assemble_pressure_robin(space, w, density, geometry::BoundaryTag::Inlet));

  pcd.pinned = space.pressure().boundary_dofs(geometry::BoundaryTag::Outlet);
  if (pcd.pinned.empty())
    pcd.pinned = {0};  // closed domain: fix the pressure level at one dof
  std::vector<char> mask(space.num_pressure(), 0);
  for (int d : pcd.pinned)
    mask[d] = 1;
  pcd.Ap = pin_rows_and_columns(laplacian, mask);
  pcd.Fp = pin_rows_and_columns(fp, mask);
  try {
    pcd.Mp_lu = LuSolver(pcd.Mp);
    pcd.Ap_lu = LuSolver(pcd.Ap);
  } catch (const Error &e) {
    throw Error(e.kind(), std::string("pressure block (PCD): ") + e.what());
  }
  return pcd;
}

BlockPreconditioner::BlockPreconditioner(const SaddleSystem &system, SchurInverse schur_inverse)
    : system_(system), schur_inverse_(std::move(schur_inverse)) {
  system.check();
  try {
    F_lu_ = LuSolver(system.F);
  } catch (const Error &e) {
    throw Error(e.kind(), std::string("velocity block: ") + e.what());
  }
}

BlockPreconditioner::BlockPreconditioner(const SaddleSystem &system, const PcdOperator &pcd)
    : BlockPreconditioner(system, [&pcd](std::span<const double> r, std::span<double> q) {
        pcd.apply_schur_inverse(r, q);
      }) {
  if (pcd.Mp.rows() != system.num_pressure())
    fail(ErrorKind::InvalidParameter, "block preconditioner: PCD size does not match the system");
}

void BlockPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const int nu = system_.num_velocity(), np = system_.num_pressure();
  if (static_cast<int>(r.size()) != nu + np || static_cast<int>(z.size()) != nu + np)
    fail(ErrorKind::InvalidParameter, "block preconditioner: vector size mismatch");
  auto q = z.subspan(nu, np);
  try {
    schur_inverse_(r.subspan(nu, np), q);
  } catch (const Error &e) {
    throw Error(e.kind(), std::string("pressure block: ") + e.what());
  }
  for (double &v : q)
    v = -v;
  Vector rhs(r.begin(), r.begin() + nu), btq(nu);
  system_.B.multiply_transpose(q, btq);
  for (int i = 0; i < nu; ++i)
    rhs[i] -= btq[i];
  try {
    F_lu_.solve(rhs, z.first(nu));
  } catch (const Error &e) {
    throw Error(e.kind(), std::string("velocity block: ") + e.what());
  }
}

LinearOperator BlockPreconditioner::as_operator() const {
  return [this](std::span<const double> r, std::span<double> z) { apply(r, z); };
}

Vector apply_block_precond(const SaddleSystem &system, const PcdOperator &pcd,
                           std::span<const double> residual) {
  Vector z(residual.size());
  BlockPreconditioner(system, pcd).apply(residual, z);
  return z;
}

std::string_view to_string(SolverMode mode) {
  return mode == SolverMode::GmresPcd ? "gmres+pcd" : "direct";
}

SolverMode solver_mode_from_string(std::string_view name) {
  if (name == "direct")
    return SolverMode::Direct;
  if (name == "gmres+pcd")
    return SolverMode::GmresPcd;
  fail(ErrorKind::InvalidParameter,
       "unknown solver mode '" + std::string(name) + "' (expected direct or gmres+pcd)");
}

SaddleSolution solve_saddle(const SaddleSystem &system, SolverMode mode, const PcdOperator *pcd,
                            const GmresOptions &options, std::span<const double> x0) {
  system.check();
  SaddleSolution out;
  if (mode == SolverMode::Direct) {
    out.x = sparse_lu_solve(system.monolithic(), system.rhs());
    return out;
  }
  if (!pcd)
    fail(ErrorKind::InvalidParameter, "solve_saddle: gmres+pcd mode needs a PCD operator");
  const BlockPreconditioner precond(system, *pcd);
  GmresResult r = gmres([&system](std::span<const double> x, std::span<double> y) { system.apply(x, y); },
                        system.rhs(), precond.as_operator(), options, x0);
  out.x = std::move(r.x);
  out.iterations = r.iterations;
  out.residual_history = std::move(r.residual_history);
  return out;
}

} // namespace nozzle::linalg
