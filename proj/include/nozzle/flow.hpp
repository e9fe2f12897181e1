#pragma once

#include "nozzle/dirichlet.hpp"
#include "nozzle/function_space.hpp"
#include "nozzle/gmres.hpp"
#include "nozzle/saddle.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace nozzle::ns {

using fem::Field;
using fem::FunctionSpace;
using geometry::AxisymMesh;
using geometry::BoundaryTag;
using geometry::Point;

/// Volumetric flow rate whose throat Reynolds number rho u_t d_t / mu equals
/// re_t, with u_t = 4 Q / (pi d_t^2).
double flow_rate_from_reynolds(double re_t, double viscosity, double density, double d_t);

/// Mean velocity 4 Q / (pi d^2) through a circular section of diameter d.
double mean_velocity(double flow_rate, double diameter);

/// u_z(r) = 2 u_mean (1 - (2 r / d)^2).
std::function<double(double)> poiseuille_inlet(double flow_rate, double d_inlet);

enum class NonlinearMode { SemiImplicit, Picard };

std::string_view to_string(NonlinearMode mode);
/// Accepts "semi-implicit" and "picard".
NonlinearMode nonlinear_mode_from_string(std::string_view name);

struct SolverSettings {
  linalg::SolverMode mode = linalg::SolverMode::Direct;
  NonlinearMode nonlinear = NonlinearMode::SemiImplicit;
  linalg::PcdBoundaryMode pcd_mode = linalg::PcdBoundaryMode::OutflowDirichlet;
  linalg::GmresOptions gmres;
  double nonlinear_tol = 1e-8;
  int max_steady_iterations = 100;
  int max_step_iterations = 50;
  /// In gmres+pcd mode, also solve every system directly and record the
  /// relative difference in the diagnostics.
  bool cross_check_direct = false;
};

/// One benchmark regime.
struct FlowCase {
  double re_throat = 500.0;
  double density = 1056.0;
  double viscosity = 0.0035;
  double dt = 1e-3;
  double end_time = 3.0;
  int order = 1;
  double inlet_diameter = 0.012;
  double throat_diameter = 0.004;
  SolverSettings solver;
  std::shared_ptr<const AxisymMesh> mesh;

  /// Throws InvalidParameter naming the offending field.
  void validate() const;
  double flow_rate() const;
  double inlet_mean_velocity() const;
  double throat_mean_velocity() const;
};

using TimeVectorFunction = std::function<std::array<double, 2>(Point, double)>;

/// Prescribed velocity on every dof of the edges carrying `tag`; with
/// radial_only only u_r is constrained.
struct VelocityCondition {
  BoundaryTag tag = BoundaryTag::Wall;
  TimeVectorFunction value;
  bool radial_only = false;
};

/// Fully specified flow problem on a discrete space. At dofs shared by
/// several conditions the earliest condition in the list wins. Boundaries
/// without a condition are natural (do-nothing unless a traction is given).
struct FlowProblem {
  std::shared_ptr<const FunctionSpace> space;
  double density = 1056.0;
  double viscosity = 0.0035;
  std::vector<VelocityCondition> conditions;
  TimeVectorFunction body_force;
  TimeVectorFunction outlet_traction;
  bool convection = true;
};

/// No-slip walls, Poiseuille inflow, u_r = 0 on the axis, free outflow.
FlowProblem benchmark_problem(const FlowCase &flow_case, std::shared_ptr<const FunctionSpace> space);

struct Diagnostics {
  double divergence_norm = 0.0;
  int nonlinear_iterations = 0;
  int linear_iterations = 0;
  /// Relative difference between the iterative and direct solutions, or -1
  /// when no cross-check was made.
  double direct_difference = -1.0;
  std::vector<double> nonlinear_residuals;
};

struct SolutionState {
  Field field;
  double time = 0.0;
  int step = 0;
  Diagnostics diagnostics;
};

/// Time-independent blocks of a problem, assembled once.
class FlowAssembler {
public:
  explicit FlowAssembler(FlowProblem problem);

  const FlowProblem &problem() const { return problem_; }
  const FunctionSpace &space() const { return *problem_.space; }
  const linalg::CsrMatrix &viscous() const { return A_; }
  const linalg::CsrMatrix &divergence() const { return B_; }
  const linalg::CsrMatrix &velocity_mass() const { return M_; }

  std::vector<fem::Constraint> constraints(double time) const;
  /// Body force and traction load at the given time.
  linalg::Vector forcing(double time) const;

  /// Oseen operator mu A + rho N(w) (Stokes when w is null or convection is
  /// off) with Dirichlet data at `time` applied.
  linalg::SaddleSystem steady_system(const Field *w, double time) const;

  /// BDF step to `time`: BDF1 with one history field, BDF2 with two
  /// (newest first). The transport field w enters the convection term.
  linalg::SaddleSystem step_system(double dt, const std::vector<const Field *> &history,
                                   const Field *w, double time) const;

  /// sqrt(d^T M_p^{-1} d) with d = B u.
  double divergence_norm(const Field &field) const;

private:
  linalg::SaddleSystem with_constraints(linalg::CsrMatrix F, linalg::Vector f, double time) const;

  FlowProblem problem_;
  linalg::CsrMatrix A_, B_, M_, Mp_;
  linalg::LuSolver Mp_lu_;
};

/// Convenience wrapper: assembles the BDF step system for the problem.
linalg::SaddleSystem assemble_step_system(const FlowProblem &problem, double dt,
                                          const std::vector<const Field *> &history, double time);

double divergence_norm(const SolutionState &state);

/// Raised by the nonlinear drivers; carries the residual history.
class NonlinearNonConvergence : public Error {
public:
  NonlinearNonConvergence(const std::string &what, std::vector<double> residuals)
      : Error(ErrorKind::NonConvergence, what), residuals_(std::move(residuals)) {}
  const std::vector<double> &residuals() const { return residuals_; }

private:
  std::vector<double> residuals_;
};

/// Picard iteration on the steady problem starting from the Stokes solution.
/// Converged when ||K(x) x - b|| / ||b|| <= nonlinear_tol with K assembled at
/// the current iterate.
SolutionState solve_steady(const FlowAssembler &assembler, const SolverSettings &settings);
SolutionState solve_steady(const FlowCase &flow_case);

struct TransientOptions {
  /// Keep every k-th state (0: only the final one).
  int snapshot_stride = 0;
  /// Stop early once ||u^n - u^{n-window}|| / ||u^n|| <= steady_tol (0: off).
  double steady_tol = 0.0;
  int steady_window = 10;
  /// Called after every step.
  std::function<void(const SolutionState &)> observer;
};

struct TimeSeriesRow {
  int step = 0;
  double time = 0.0;
  Diagnostics diagnostics;
};

struct Trajectory {
  std::vector<SolutionState> snapshots;
  SolutionState final_state;
  std::vector<TimeSeriesRow> series;
  bool reached_steady = false;
  /// Last value of the steadiness measure (-1 before the window fills).
  double steadiness = -1.0;
};

/// Marches from rest with BDF1 then BDF2. Semi-implicit mode solves one
/// Oseen system per step with extrapolated transport; picard mode iterates
/// each step to nonlinear_tol. Linear failures are rethrown naming the step.
Trajectory solve_transient(const FlowAssembler &assembler, const SolverSettings &settings, double dt,
                           double end_time, const TransientOptions &options = {});
Trajectory solve_transient(const FlowCase &flow_case, const TransientOptions &options = {});

/// Plain-text checkpoint: header with case parameters, time and step, then
/// the coefficient vector.
void write_checkpoint(std::ostream &out, const SolutionState &state, const FlowCase &flow_case);
SolutionState read_checkpoint(std::istream &in, std::shared_ptr<const FunctionSpace> space);

} // namespace nozzle::ns
