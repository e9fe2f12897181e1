#include "nozzle/flow.hpp"

#include "nozzle/assembly.hpp"
#include "nozzle/error.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace nozzle::ns {

using linalg::CsrMatrix;
using linalg::SaddleSystem;
using linalg::Vector;

double flow_rate_from_reynolds(double re_t, double viscosity, double density, double d_t) {
  if (!(re_t > 0.0) || !(viscosity > 0.0) || !(density > 0.0) || !(d_t > 0.0))
    fail(ErrorKind::InvalidParameter,
         "flow_rate_from_reynolds: Reynolds number, viscosity, density and diameter must be positive");
  return std::numbers::pi * d_t * viscosity * re_t / (4.0 * density);
}

double mean_velocity(double flow_rate, double diameter) {
  if (!(diameter > 0.0))
    fail(ErrorKind::InvalidParameter, "mean_velocity: diameter must be positive");
  return 4.0 * flow_rate / (std::numbers::pi * diameter * diameter);
}

std::function<double(double)> poiseuille_inlet(double flow_rate, double d_inlet) {
  if (!(flow_rate > 0.0) || !(d_inlet > 0.0))
    fail(ErrorKind::InvalidParameter, "poiseuille_inlet: flow rate and diameter must be positive");
  const double peak = 2.0 * mean_velocity(flow_rate, d_inlet);
  return [peak, d_inlet](double r) {
    const double s = 2.0 * r / d_inlet;
    return peak * (1.0 - s * s);
  };
}

std::string_view to_string(NonlinearMode mode) {
  return mode == NonlinearMode::Picard ? "picard" : "semi-implicit";
}

NonlinearMode nonlinear_mode_from_string(std::string_view name) {
  if (name == "semi-implicit")
    return NonlinearMode::SemiImplicit;
  if (name == "picard")
    return NonlinearMode::Picard;
  fail(ErrorKind::InvalidParameter,
       "unknown nonlinear mode '" + std::string(name) + "' (expected semi-implicit or picard)");
}

void FlowCase::validate() const {
  auto positive = [](double v, const char *name) {
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorKind::InvalidParameter, std::string(name) + " must be positive");
  };
  positive(re_throat, "re_throat");
  positive(density, "density");
  positive(viscosity, "viscosity");
  positive(dt, "dt");
  positive(end_time, "end_time");
  positive(inlet_diameter, "inlet_diameter");
  positive(throat_diameter, "throat_diameter");
  if (!(dt < end_time))
    fail(ErrorKind::InvalidParameter, "dt must be smaller than end_time");
  if (order != 1 && order != 2)
    fail(ErrorKind::InvalidParameter, "order N must be 1 or 2");
  if (!(solver.nonlinear_tol > 0.0))
    fail(ErrorKind::InvalidParameter, "nonlinear tolerance must be positive");
}

double FlowCase::flow_rate() const {
  return flow_rate_from_reynolds(re_throat, viscosity, density, throat_diameter);
}

double FlowCase::inlet_mean_velocity() const { return mean_velocity(flow_rate(), inlet_diameter); }

double FlowCase::throat_mean_velocity() const { return mean_velocity(flow_rate(), throat_diameter); }

FlowProblem benchmark_problem(const FlowCase &flow_case, std::shared_ptr<const FunctionSpace> space) {
  flow_case.validate();
  FlowProblem p;
  p.space = std::move(space);
  p.density = flow_case.density;
  p.viscosity = flow_case.viscosity;
  const auto inlet = poiseuille_inlet(flow_case.flow_rate(), flow_case.inlet_diameter);
  const auto zero = [](Point, double) { return std::array<double, 2>{0.0, 0.0}; };
  p.conditions = {
      {BoundaryTag::Wall, zero, false},
      {BoundaryTag::Inlet, [inlet](Point x, double) { return std::array<double, 2>{0.0, inlet(x.r)}; }, false},
      {BoundaryTag::Axis, zero, true},
  };
  return p;
}

FlowAssembler::FlowAssembler(FlowProblem problem) : problem_(std::move(problem)) {
  if (!problem_.space)
    fail(ErrorKind::InvalidParameter, "flow problem without a function space");
  if (!(problem_.density > 0.0) || !(problem_.viscosity > 0.0))
    fail(ErrorKind::InvalidParameter, "flow problem: density and viscosity must be positive");
  const FunctionSpace &s = *problem_.space;
  A_ = fem::assemble_viscous_block(s, problem_.viscosity);
  B_ = fem::assemble_divergence_block(s);
  M_ = fem::assemble_mass(s, fem::MassKind::Velocity, problem_.density);
  Mp_ = fem::assemble_mass(s, fem::MassKind::Pressure);
  Mp_lu_ = linalg::LuSolver(Mp_);
}

std::vector<fem::Constraint> FlowAssembler::constraints(double time) const {
  const FunctionSpace &s = space();
  std::vector<char> taken(s.num_velocity(), 0);
  std::vector<fem::Constraint> out;
  for (const auto &c : problem_.conditions)
    for (int d : s.velocity().boundary_dofs(c.tag)) {
      const auto v = c.value(s.velocity().dof_point(d), time);
      if (!taken[s.ur_dof(d)]) {
        taken[s.ur_dof(d)] = 1;
        out.emplace_back(s.ur_dof(d), v[0]);
      }
      if (!c.radial_only && !taken[s.uz_dof(d)]) {
        taken[s.uz_dof(d)] = 1;
        out.emplace_back(s.uz_dof(d), v[1]);
      }
    }
  return out;
}

Vector FlowAssembler::forcing(double time) const {
  Vector f(space().num_velocity(), 0.0);
  if (problem_.body_force) {
    const auto load = fem::assemble_body_force(space(), [&](Point p) { return problem_.body_force(p, time); });
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] += load[i];
  }
  if (problem_.outlet_traction) {
    const auto load = fem::assemble_traction(space(), BoundaryTag::Outlet,
                                             [&](Point p) { return problem_.outlet_traction(p, time); });
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] += load[i];
  }
  return f;
}

SaddleSystem FlowAssembler::with_constraints(CsrMatrix F, Vector f, double time) const {
  SaddleSystem sys;
  sys.F = std::move(F);
  sys.B = B_;
  sys.f = std::move(f);
  sys.g.assign(space().num_pressure(), 0.0);
  double mean_diagonal = 0.0;
  for (int i = 0; i < sys.F.rows(); ++i)
    mean_diagonal += std::abs(sys.F.at(i, i));
  mean_diagonal /= std::max(1, sys.F.rows());
  const double scale = mean_diagonal > 0.0 ? std::exp2(std::round(std::log2(mean_diagonal))) : 1.0;
  return fem::apply_dirichlet(sys, constraints(time), scale);
}

SaddleSystem FlowAssembler::steady_system(const Field *w, double time) const {
  CsrMatrix F = A_;
  if (w && problem_.convection)
    F = F.add(fem::assemble_convection(space(), *w, problem_.density));
  return with_constraints(std::move(F), forcing(time), time);
}

SaddleSystem FlowAssembler::step_system(double dt, const std::vector<const Field *> &history,
                                        const Field *w, double time) const {
  if (!(dt > 0.0))
    fail(ErrorKind::InvalidParameter, "step_system: dt must be positive");
  if (history.empty() || history.size() > 2 || !history[0] || (history.size() == 2 && !history[1]))
    fail(ErrorKind::InvalidParameter, "step_system: BDF1 needs one history state, BDF2 two");
  const int nu = space().num_velocity();
  // BDF weights: alpha u^{n+1} - sum beta_k u^{n+1-k}.
  const bool bdf2 = history.size() == 2;
  const double alpha = bdf2 ? 1.5 : 1.0;
  Vector combo(nu, 0.0);
  const auto un = history[0]->velocity();
  for (int i = 0; i < nu; ++i)
    combo[i] = bdf2 ? 2.0 * un[i] - 0.5 * history[1]->velocity()[i] : un[i];
  Vector f = forcing(time);
  M_.multiply_add(combo, f, 1.0 / dt);
  CsrMatrix F = A_.add(M_, alpha / dt);
  if (w && problem_.convection)
    F = F.add(fem::assemble_convection(space(), *w, problem_.density));
  return with_constraints(std::move(F), std::move(f), time);
}

double FlowAssembler::divergence_norm(const Field &field) const {
  const Vector d = B_ * field.velocity();
  const Vector y = Mp_lu_.solve(d);
  return std::sqrt(std::max(0.0, linalg::dot(d, y)));
}

SaddleSystem assemble_step_system(const FlowProblem &problem, double dt,
                                  const std::vector<const Field *> &history, double time) {
  const FlowAssembler assembler(problem);
  if (history.empty())
    fail(ErrorKind::InvalidParameter, "assemble_step_system: missing history");
  Field w(problem.space);
  if (history.size() == 2 && history[0] && history[1]) {
    for (std::size_t i = 0; i < w.coefficients().size(); ++i)
      w.coefficients()[i] = 2.0 * history[0]->coefficients()[i] - history[1]->coefficients()[i];
  } else if (history[0]) {
    w = *history[0];
  }
  return assembler.step_system(dt, history, &w, time);
}

double divergence_norm(const SolutionState &state) {
  const auto space = state.field.space_ptr();
  const CsrMatrix B = fem::assemble_divergence_block(*space);
  const linalg::LuSolver mp(fem::assemble_mass(*space, fem::MassKind::Pressure));
  const Vector d = B * state.field.velocity();
  return std::sqrt(std::max(0.0, linalg::dot(d, mp.solve(d))));
}

namespace {

double relative_residual(const SaddleSystem &sys, std::span<const double> x) {
  Vector r = sys.rhs();
  Vector kx(r.size());
  sys.apply(x, kx);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] -= kx[i];
  const double bn = linalg::norm2(sys.rhs());
  const double rn = linalg::norm2(r);
  return bn > 0.0 ? rn / bn : rn;
}

/// Solves one linear system according to the settings, accumulating
/// iteration counts and the optional direct cross-check.
Vector solve_linear(const FlowAssembler &assembler, const SaddleSystem &sys, const SolverSettings &settings,
                    const Field *w, double time_coefficient, std::span<const double> x0, bool inside_picard,
                    Diagnostics &diag) {
  if (settings.mode == linalg::SolverMode::Direct) {
    ++diag.linear_iterations;
    return linalg::solve_saddle(sys, linalg::SolverMode::Direct).x;
  }
  const FlowProblem &p = assembler.problem();
  const Field zero(p.space);
  const Field &transport = (w && p.convection) ? *w : zero;
  const linalg::PcdOperator pcd =
      linalg::build_pcd(assembler.space(), p.viscosity, p.density, transport, settings.pcd_mode, time_coefficient);
  linalg::GmresOptions opts = settings.gmres;
  if (inside_picard)
    opts.tol = std::min(opts.tol, 0.1 * settings.nonlinear_tol);
  const auto sol = linalg::solve_saddle(sys, linalg::SolverMode::GmresPcd, &pcd, opts, x0);
  diag.linear_iterations += sol.iterations;
  if (settings.cross_check_direct) {
    const Vector direct = linalg::solve_saddle(sys, linalg::SolverMode::Direct).x;
    Vector diff(direct);
    for (std::size_t i = 0; i < diff.size(); ++i)
      diff[i] -= sol.x[i];
    const double dn = linalg::norm2(direct);
    const double rel = dn > 0.0 ? linalg::norm2(diff) / dn : linalg::norm2(diff);
    diag.direct_difference = std::max(diag.direct_difference, rel);
  }
  return sol.x;
}

} // namespace

SolutionState solve_steady(const FlowAssembler &assembler, const SolverSettings &settings) {
  const FlowProblem &p = assembler.problem();
  SolutionState state{Field(p.space), 0.0, 0, {}};
  Diagnostics &diag = state.diagnostics;
  auto &x = state.field.coefficients();
  x = solve_linear(assembler, assembler.steady_system(nullptr, 0.0), settings, nullptr, 0.0, {}, true, diag);
  diag.nonlinear_iterations = 1;
  while (true) {
    const SaddleSystem sys = assembler.steady_system(&state.field, 0.0);
    const double res = relative_residual(sys, x);
    diag.nonlinear_residuals.push_back(res);
    if (res <= settings.nonlinear_tol)
      break;
    if (diag.nonlinear_iterations >= settings.max_steady_iterations) {
      std::ostringstream msg;
      msg << "steady Picard iteration did not converge in " << settings.max_steady_iterations
          << " iterations (last relative residual " << res << ")";
      throw NonlinearNonConvergence(msg.str(), diag.nonlinear_residuals);
    }
    x = solve_linear(assembler, sys, settings, &state.field, 0.0, x, true, diag);
    ++diag.nonlinear_iterations;
  }
  diag.divergence_norm = assembler.divergence_norm(state.field);
  return state;
}

namespace {

std::shared_ptr<const FunctionSpace> case_space(const FlowCase &flow_case) {
  flow_case.validate();
  if (!flow_case.mesh)
    fail(ErrorKind::InvalidParameter, "flow case has no mesh");
  return std::make_shared<const FunctionSpace>(flow_case.mesh, flow_case.order);
}

} // namespace

SolutionState solve_steady(const FlowCase &flow_case) {
  const FlowAssembler assembler(benchmark_problem(flow_case, case_space(flow_case)));
  return solve_steady(assembler, flow_case.solver);
}

Trajectory solve_transient(const FlowAssembler &assembler, const SolverSettings &settings, double dt,
                           double end_time, const TransientOptions &options) {
  if (!(dt > 0.0) || !(end_time > dt * 0.5))
    fail(ErrorKind::InvalidParameter, "solve_transient: need dt > 0 and end_time >= dt");
  if (options.steady_window < 1)
    fail(ErrorKind::InvalidParameter, "solve_transient: steady_window must be at least 1");
  const FlowProblem &p = assembler.problem();
  const int nu = p.space->num_velocity();
  const long steps = std::lround(end_time / dt);

  Trajectory traj{{}, SolutionState{Field(p.space), 0.0, 0, {}}, {}, false, -1.0};
  Field u_n(p.space), u_nm1(p.space), w(p.space);
  std::deque<Vector> window;
  window.emplace_back(u_n.velocity().begin(), u_n.velocity().end());

  for (long n = 1; n <= steps; ++n) {
    const double time = static_cast<double>(n) * dt;
    const bool bdf2 = n > 1;
    std::vector<const Field *> history{&u_n};
    if (bdf2)
      history.push_back(&u_nm1);
    for (std::size_t i = 0; i < w.coefficients().size(); ++i)
      w.coefficients()[i] = bdf2 ? 2.0 * u_n.coefficients()[i] - u_nm1.coefficients()[i] : u_n.coefficients()[i];
    const double time_coefficient = (bdf2 ? 1.5 : 1.0) / dt;

    SolutionState state{Field(p.space), time, static_cast<int>(n), {}};
    Diagnostics &diag = state.diagnostics;
    auto &x = state.field.coefficients();
    try {
      const SaddleSystem sys = assembler.step_system(dt, history, &w, time);
      const bool picard = settings.nonlinear == NonlinearMode::Picard;
      x = solve_linear(assembler, sys, settings, &w, time_coefficient, u_n.coefficients(), picard, diag);
      diag.nonlinear_iterations = 1;
      while (picard) {
        const SaddleSystem k = assembler.step_system(dt, history, &state.field, time);
        const double res = relative_residual(k, x);
        diag.nonlinear_residuals.push_back(res);
        if (res <= settings.nonlinear_tol)
          break;
        if (diag.nonlinear_iterations >= settings.max_step_iterations) {
          std::ostringstream msg;
          msg << "step " << n << ": Picard iteration did not converge in " << settings.max_step_iterations
              << " iterations (last relative residual " << res << ")";
          throw NonlinearNonConvergence(msg.str(), diag.nonlinear_residuals);
        }
        x = solve_linear(assembler, k, settings, &state.field, time_coefficient, x, true, diag);
        ++diag.nonlinear_iterations;
      }
    } catch (const NonlinearNonConvergence &) {
      throw;
    } catch (const Error &e) {
      throw Error(e.kind(), "step " + std::to_string(n) + ": " + e.what());
    }
    diag.divergence_norm = assembler.divergence_norm(state.field);

    u_nm1 = std::move(u_n);
    u_n = state.field;
    traj.series.push_back({state.step, state.time, diag});
    if (options.observer)
      options.observer(state);
    if (options.snapshot_stride > 0 && n % options.snapshot_stride == 0)
      traj.snapshots.push_back(state);

    window.emplace_back(u_n.velocity().begin(), u_n.velocity().end());
    if (static_cast<int>(window.size()) > options.steady_window + 1)
      window.pop_front();
    if (static_cast<int>(window.size()) == options.steady_window + 1) {
      double num = 0.0, den = 0.0;
      for (int i = 0; i < nu; ++i) {
        const double d = window.back()[i] - window.front()[i];
        num += d * d;
        den += window.back()[i] * window.back()[i];
      }
      traj.steadiness = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    const bool last = n == steps;
    if (options.steady_tol > 0.0 && traj.steadiness >= 0.0 && traj.steadiness <= options.steady_tol) {
      traj.reached_steady = true;
      traj.final_state = std::move(state);
      break;
    }
    if (last)
      traj.final_state = std::move(state);
  }
  return traj;
}

Trajectory solve_transient(const FlowCase &flow_case, const TransientOptions &options) {
  const FlowAssembler assembler(benchmark_problem(flow_case, case_space(flow_case)));
  return solve_transient(assembler, flow_case.solver, flow_case.dt, flow_case.end_time, options);
}

void write_checkpoint(std::ostream &out, const SolutionState &state, const FlowCase &flow_case) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "nozzle-checkpoint v1\n";
  out << "re_throat " << num(flow_case.re_throat) << "\n";
  out << "density " << num(flow_case.density) << "\n";
  out << "viscosity " << num(flow_case.viscosity) << "\n";
  out << "dt " << num(flow_case.dt) << "\n";
  out << "end_time " << num(flow_case.end_time) << "\n";
  out << "order " << state.field.space().order() << "\n";
  out << "time " << num(state.time) << "\n";
  out << "step " << state.step << "\n";
  out << "num_dofs " << state.field.coefficients().size() << "\n";
  out << "coefficients\n";
  for (double c : state.field.coefficients())
    out << num(c) << "\n";
  if (!out)
    fail(ErrorKind::Io, "failed to write checkpoint");
}

SolutionState read_checkpoint(std::istream &in, std::shared_ptr<const FunctionSpace> space) {
  std::string line;
  if (!std::getline(in, line) || line != "nozzle-checkpoint v1")
    fail(ErrorKind::Parse, "checkpoint: missing 'nozzle-checkpoint v1' header");
  std::map<std::string, std::string> header;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "coefficients")
      break;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value))
      fail(ErrorKind::Parse, "checkpoint line " + std::to_string(line_no) + ": expected 'key value'");
    header[key] = value;
  }
  for (const char *key : {"order", "time", "step", "num_dofs"})
    if (!header.count(key))
      fail(ErrorKind::Parse, std::string("checkpoint: missing '") + key + "'");
  if (std::stoi(header["order"]) != space->order())
    fail(ErrorKind::InvalidInput, "checkpoint: order does not match the function space");
  const std::size_t n = std::stoul(header["num_dofs"]);
  if (n != static_cast<std::size_t>(space->num_total()))
    fail(ErrorKind::InvalidInput, "checkpoint: dof count does not match the function space");
  std::vector<double> coeffs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> coeffs[i]))
      fail(ErrorKind::Parse, "checkpoint: truncated coefficient block at entry " + std::to_string(i));
  }
  SolutionState state{Field(std::move(space), std::move(coeffs)), std::stod(header["time"]),
                      std::stoi(header["step"]), {}};
  return state;
}

} // namespace nozzle::ns
