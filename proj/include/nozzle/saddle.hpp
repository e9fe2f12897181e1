#pragma once

#include "nozzle/csr.hpp"
#include "nozzle/function_space.hpp"
#include "nozzle/gmres.hpp"
#include "nozzle/sparse_lu.hpp"

#include <optional>
#include <string_view>

namespace nozzle::linalg {

/// Block system [F B^T; B C] [u; p] = [f; g]. C is empty (zero) unless
/// pressure dofs have been pinned by Dirichlet elimination, in which case it
/// carries their unit diagonal.
struct SaddleSystem {
  CsrMatrix F;
  CsrMatrix B;
  Vector f;
  Vector g;
  CsrMatrix C;

  int num_velocity() const { return F.rows(); }
  int num_pressure() const { return B.rows(); }
  int size() const { return num_velocity() + num_pressure(); }

  /// Throws InvalidParameter on inconsistent block shapes.
  void check() const;
  CsrMatrix monolithic() const;
  Vector rhs() const;
  /// y = K x for the full operator without forming it.
  void apply(std::span<const double> x, std::span<double> y) const;
};

enum class PcdBoundaryMode { OutflowDirichlet, InflowRobin };

std::string_view to_string(PcdBoundaryMode mode);
/// Accepts "outflow-dirichlet" and "inflow-robin"; InvalidParameter otherwise.
PcdBoundaryMode pcd_mode_from_string(std::string_view name);

/// Pressure convection-diffusion approximation of the Schur complement
/// S = B F^{-1} B^T, applied as S^{-1} r ~ A_p^{-1} F_p M_p^{-1} r.
struct PcdOperator {
  CsrMatrix Mp;
  CsrMatrix Ap;
  CsrMatrix Fp;
  PcdBoundaryMode mode = PcdBoundaryMode::OutflowDirichlet;
  /// Pressure dofs carrying identity rows and columns in A_p and F_p.
  std::vector<int> pinned;
  LuSolver Mp_lu;
  LuSolver Ap_lu;

  /// q = A_p^{-1} F_p M_p^{-1} r (the positive Schur-inverse approximation).
  void apply_schur_inverse(std::span<const double> r, std::span<double> q) const;
};

/// F_p = mu A_p + rho N_p(w) + time_coefficient * rho M_p, where
/// time_coefficient is alpha / dt for an unsteady step and 0 when steady.
/// Outlet pressure dofs are pinned in A_p and F_p in both modes; the
/// inflow-robin mode also adds -rho (w . n) on the inlet to F_p.
PcdOperator build_pcd(const fem::FunctionSpace &space, double viscosity, double density,
                      const fem::Field &w, PcdBoundaryMode mode, double time_coefficient = 0.0);

/// Upper block-triangular right preconditioner
///   P^{-1} [r_u; r_p] = [F^{-1}(r_u - B^T q); q],  q = -S~^{-1} r_p.
class BlockPreconditioner {
public:
  using SchurInverse = std::function<void(std::span<const double>, std::span<double>)>;

  BlockPreconditioner(const SaddleSystem &system, SchurInverse schur_inverse);
  BlockPreconditioner(const SaddleSystem &system, const PcdOperator &pcd);

  void apply(std::span<const double> r, std::span<double> z) const;
  LinearOperator as_operator() const;

private:
  const SaddleSystem &system_;
  SchurInverse schur_inverse_;
  LuSolver F_lu_;
};

Vector apply_block_precond(const SaddleSystem &system, const PcdOperator &pcd,
                           std::span<const double> residual);

enum class SolverMode { Direct, GmresPcd };

std::string_view to_string(SolverMode mode);
/// Accepts "direct" and "gmres+pcd".
SolverMode solver_mode_from_string(std::string_view name);

struct SaddleSolution {
  Vector x;
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Direct monolithic LU, or right-preconditioned GMRES with the block PCD
/// preconditioner (pcd required in that mode).
SaddleSolution solve_saddle(const SaddleSystem &system, SolverMode mode,
                            const PcdOperator *pcd = nullptr, const GmresOptions &options = {},
                            std::span<const double> x0 = {});

} // namespace nozzle::linalg
