#include "nozzle/runner.hpp"

#include "nozzle/error.hpp"
#include "nozzle/validation.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace nozzle::runner {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string &key, const std::string &what) {
  fail(ErrorKind::Config, "config key '" + key + "': " + what);
}

double get_number(const json &v, const std::string &key) {
  if (!v.is_number())
    config_error(key, "expected a number, got " + std::string(v.type_name()));
  return v.get<double>();
}

int get_int(const json &v, const std::string &key) {
  if (!v.is_number_integer())
    config_error(key, "expected an integer, got " + std::string(v.type_name()));
  const auto i = v.get<long long>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
    config_error(key, "integer out of range");
  return static_cast<int>(i);
}

std::string get_string(const json &v, const std::string &key) {
  if (!v.is_string())
    config_error(key, "expected a string, got " + std::string(v.type_name()));
  return v.get<std::string>();
}

bool get_bool(const json &v, const std::string &key) {
  if (!v.is_boolean())
    config_error(key, "expected true or false, got " + std::string(v.type_name()));
  return v.get<bool>();
}

fs::path resolve(const fs::path &p, const fs::path &base) {
  if (p.is_absolute())
    return p.lexically_normal();
  return fs::absolute(base.empty() ? fs::current_path() / p : base / p).lexically_normal();
}

std::vector<fs::path> get_paths(const json &v, const std::string &key, const fs::path &base) {
  if (!v.is_array())
    config_error(key, "expected an array of paths");
  std::vector<fs::path> out;
  for (const auto &item : v)
    out.push_back(resolve(get_string(item, key), base));
  return out;
}

using Setter = std::function<void(RunConfig &, const json &, const fs::path &)>;

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto number = [&t](const char *key, double RunConfig::*field) {
      t[key] = [key, field](RunConfig &c, const json &v, const fs::path &) { c.*field = get_number(v, key); };
    };
    auto integer = [&t](const char *key, int RunConfig::*field) {
      t[key] = [key, field](RunConfig &c, const json &v, const fs::path &) { c.*field = get_int(v, key); };
    };
    auto text = [&t](const char *key, std::string RunConfig::*field) {
      t[key] = [key, field](RunConfig &c, const json &v, const fs::path &) { c.*field = get_string(v, key); };
    };
    auto nozzle = [&t](const char *key, double geometry::NozzleProfile::*field) {
      t[key] = [key, field](RunConfig &c, const json &v, const fs::path &) { c.nozzle.*field = get_number(v, key); };
    };
    auto size = [&t](const char *key, double geometry::NozzleSizing::*field) {
      t[key] = [key, field](RunConfig &c, const json &v, const fs::path &) { c.sizing.*field = get_number(v, key); };
    };
    nozzle("inlet_radius", &geometry::NozzleProfile::inlet_radius);
    nozzle("throat_radius", &geometry::NozzleProfile::throat_radius);
    nozzle("inlet_length", &geometry::NozzleProfile::inlet_length);
    nozzle("convergent_length", &geometry::NozzleProfile::convergent_length);
    nozzle("throat_length", &geometry::NozzleProfile::throat_length);
    nozzle("outlet_length", &geometry::NozzleProfile::outlet_length);
    nozzle("z_origin", &geometry::NozzleProfile::z_origin);
    size("h_inlet", &geometry::NozzleSizing::inlet);
    size("h_convergent", &geometry::NozzleSizing::convergent);
    size("h_throat", &geometry::NozzleSizing::throat);
    size("h_expansion", &geometry::NozzleSizing::expansion);
    integer("refinements", &RunConfig::refinements);
    number("min_angle", &RunConfig::min_angle);
    t["seed"] = [](RunConfig &c, const json &v, const fs::path &) {
      if (!v.is_number_unsigned())
        config_error("seed", "expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    };
    number("re_throat", &RunConfig::re_throat);
    number("density", &RunConfig::density);
    number("viscosity", &RunConfig::viscosity);
    number("dt", &RunConfig::dt);
    number("end_time", &RunConfig::end_time);
    integer("order", &RunConfig::order);
    text("driver", &RunConfig::driver);
    text("solver", &RunConfig::solver);
    text("nonlinear", &RunConfig::nonlinear);
    text("pcd_mode", &RunConfig::pcd_mode);
    number("gmres_tol", &RunConfig::gmres_tol);
    integer("gmres_restart", &RunConfig::gmres_restart);
    integer("gmres_max_iterations", &RunConfig::gmres_max_iterations);
    number("nonlinear_tol", &RunConfig::nonlinear_tol);
    integer("max_steady_iterations", &RunConfig::max_steady_iterations);
    integer("max_step_iterations", &RunConfig::max_step_iterations);
    t["cross_check_direct"] = [](RunConfig &c, const json &v, const fs::path &) {
      c.cross_check_direct = get_bool(v, "cross_check_direct");
    };
    number("steady_tol", &RunConfig::steady_tol);
    integer("steady_window", &RunConfig::steady_window);
    integer("checkpoint_stride", &RunConfig::checkpoint_stride);
    t["stations"] = [](RunConfig &c, const json &v, const fs::path &) {
      if (!v.is_array() || v.empty())
        config_error("stations", "expected a non-empty array of numbers");
      c.stations.clear();
      for (const auto &item : v)
        c.stations.push_back(get_number(item, "stations"));
    };
    t["velocity_data"] = [](RunConfig &c, const json &v, const fs::path &base) {
      c.velocity_data = get_paths(v, "velocity_data", base);
    };
    t["pressure_data"] = [](RunConfig &c, const json &v, const fs::path &base) {
      c.pressure_data = get_paths(v, "pressure_data", base);
    };
    t["output_dir"] = [](RunConfig &c, const json &v, const fs::path &base) {
      c.output_dir = resolve(get_string(v, "output_dir"), base);
    };
    return t;
  }();
  return table;
}

} // namespace

void validate(const RunConfig &c) {
  try {
    geometry::validate(c.nozzle);
  } catch (const Error &e) {
    fail(ErrorKind::Config, std::string("nozzle geometry: ") + e.what());
  }
  const auto domain = geometry::nozzle_domain(c.nozzle);
  const char *size_keys[] = {"h_inlet", "h_convergent", "h_throat", "h_expansion"};
  const auto sizes = c.sizing.per_region();
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (!(sizes[k] > 0.0))
      config_error(size_keys[k], "must be positive");
    if (!(sizes[k] < domain.region_extent[k]))
      config_error(size_keys[k], "must be smaller than the region's radial extent " +
                                     std::to_string(domain.region_extent[k]) + " m");
  }
  if (c.refinements < 0 || c.refinements > 4)
    config_error("refinements", "must be between 0 and 4");
  if (!(c.min_angle > 0.0 && c.min_angle <= 33.0))
    config_error("min_angle", "must be in (0, 33] degrees");
  auto positive = [](double v, const char *key) {
    if (!(v > 0.0) || !std::isfinite(v))
      config_error(key, "must be positive");
  };
  positive(c.re_throat, "re_throat");
  positive(c.density, "density");
  positive(c.viscosity, "viscosity");
  positive(c.dt, "dt");
  positive(c.end_time, "end_time");
  if (!(c.dt < c.end_time))
    config_error("dt", "must be smaller than end_time");
  if (c.order != 1 && c.order != 2)
    config_error("order", "must be 1 or 2");
  if (c.driver != "steady" && c.driver != "transient")
    config_error("driver", "must be 'steady' or 'transient'");
  if (c.solver != "direct" && c.solver != "gmres+pcd")
    config_error("solver", "must be 'direct' or 'gmres+pcd'");
  if (c.nonlinear != "semi-implicit" && c.nonlinear != "picard")
    config_error("nonlinear", "must be 'semi-implicit' or 'picard'");
  if (c.pcd_mode != "outflow-dirichlet" && c.pcd_mode != "inflow-robin")
    config_error("pcd_mode", "must be 'outflow-dirichlet' or 'inflow-robin'");
  if (!(c.gmres_tol > 0.0 && c.gmres_tol < 1.0))
    config_error("gmres_tol", "must be in (0, 1)");
  if (c.gmres_restart < 1)
    config_error("gmres_restart", "must be at least 1");
  if (c.gmres_max_iterations < 1)
    config_error("gmres_max_iterations", "must be at least 1");
  if (!(c.nonlinear_tol > 0.0 && c.nonlinear_tol < 1.0))
    config_error("nonlinear_tol", "must be in (0, 1)");
  if (c.max_steady_iterations < 1)
    config_error("max_steady_iterations", "must be at least 1");
  if (c.max_step_iterations < 1)
    config_error("max_step_iterations", "must be at least 1");
  if (!(c.steady_tol >= 0.0))
    config_error("steady_tol", "must be non-negative");
  if (c.steady_window < 1)
    config_error("steady_window", "must be at least 1");
  if (c.checkpoint_stride < 0)
    config_error("checkpoint_stride", "must be non-negative");
  if (c.stations.empty())
    config_error("stations", "must not be empty");
  for (double z : c.stations)
    if (!c.nozzle.contains_axial(z))
      config_error("stations", "station z = " + std::to_string(z) + " lies outside the nozzle");
  for (const auto *list : {&c.velocity_data, &c.pressure_data})
    for (const auto &p : *list)
      if (!fs::is_regular_file(p))
        config_error(list == &c.velocity_data ? "velocity_data" : "pressure_data", "no such file " + p.string());
  if (c.output_dir.empty())
    config_error("output_dir", "must not be empty");
}

RunConfig parse_config_text(std::string_view text, const fs::path &base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    fail(ErrorKind::Config, "config must be a JSON object");
  RunConfig c;
  c.output_dir = resolve(c.output_dir, base_dir);
  for (const auto &[key, value] : doc.items()) {
    const auto it = setters().find(key);
    if (it == setters().end())
      config_error(key, "unknown key");
    it->second(c, value, base_dir);
  }
  validate(c);
  return c;
}

RunConfig parse_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::Config, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), fs::absolute(path).parent_path());
}

std::string effective_config_json(const RunConfig &c) {
  json j;
  j["inlet_radius"] = c.nozzle.inlet_radius;
  j["throat_radius"] = c.nozzle.throat_radius;
  j["inlet_length"] = c.nozzle.inlet_length;
  j["convergent_length"] = c.nozzle.convergent_length;
  j["throat_length"] = c.nozzle.throat_length;
  j["outlet_length"] = c.nozzle.outlet_length;
  j["z_origin"] = c.nozzle.z_origin;
  j["h_inlet"] = c.sizing.inlet;
  j["h_convergent"] = c.sizing.convergent;
  j["h_throat"] = c.sizing.throat;
  j["h_expansion"] = c.sizing.expansion;
  j["refinements"] = c.refinements;
  j["min_angle"] = c.min_angle;
  j["seed"] = c.seed;
  j["re_throat"] = c.re_throat;
  j["density"] = c.density;
  j["viscosity"] = c.viscosity;
  j["dt"] = c.dt;
  j["end_time"] = c.end_time;
  j["order"] = c.order;
  j["driver"] = c.driver;
  j["solver"] = c.solver;
  j["nonlinear"] = c.nonlinear;
  j["pcd_mode"] = c.pcd_mode;
  j["gmres_tol"] = c.gmres_tol;
  j["gmres_restart"] = c.gmres_restart;
  j["gmres_max_iterations"] = c.gmres_max_iterations;
  j["nonlinear_tol"] = c.nonlinear_tol;
  j["max_steady_iterations"] = c.max_steady_iterations;
  j["max_step_iterations"] = c.max_step_iterations;
  j["cross_check_direct"] = c.cross_check_direct;
  j["steady_tol"] = c.steady_tol;
  j["steady_window"] = c.steady_window;
  j["checkpoint_stride"] = c.checkpoint_stride;
  j["stations"] = c.stations;
  auto paths = [](const std::vector<fs::path> &ps) {
    json a = json::array();
    for (const auto &p : ps)
      a.push_back(p.string());
    return a;
  };
  j["velocity_data"] = paths(c.velocity_data);
  j["pressure_data"] = paths(c.pressure_data);
  j["output_dir"] = c.output_dir.string();
  return j.dump(2) + "\n";
}

ns::FlowCase flow_case(const RunConfig &c) {
  ns::FlowCase f;
  f.re_throat = c.re_throat;
  f.density = c.density;
  f.viscosity = c.viscosity;
  f.dt = c.dt;
  f.end_time = c.end_time;
  f.order = c.order;
  f.inlet_diameter = 2.0 * c.nozzle.inlet_radius;
  f.throat_diameter = 2.0 * c.nozzle.throat_radius;
  f.solver.mode = linalg::solver_mode_from_string(c.solver);
  f.solver.nonlinear = ns::nonlinear_mode_from_string(c.nonlinear);
  f.solver.pcd_mode = linalg::pcd_mode_from_string(c.pcd_mode);
  f.solver.gmres = {c.gmres_tol, c.gmres_restart, c.gmres_max_iterations};
  f.solver.nonlinear_tol = c.nonlinear_tol;
  f.solver.max_steady_iterations = c.max_steady_iterations;
  f.solver.max_step_iterations = c.max_step_iterations;
  f.solver.cross_check_direct = c.cross_check_direct;
  return f;
}

Command command_from_string(std::string_view name) {
  if (name == "mesh")
    return Command::Mesh;
  if (name == "run")
    return Command::Run;
  if (name == "validate")
    return Command::Validate;
  if (name == "report")
    return Command::Report;
  if (name == "all")
    return Command::All;
  fail(ErrorKind::InvalidParameter, "unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command command) {
  switch (command) {
  case Command::Mesh: return "mesh";
  case Command::Run: return "run";
  case Command::Validate: return "validate";
  case Command::Report: return "report";
  case Command::All: return "all";
  }
  return "?";
}

std::string version_text() {
  std::ostringstream out;
  out << "nozzlebench 1.0.0\n"
      << "config schema " << config_schema_version << "\n"
      << "mesh format axisym-mesh v1\n"
      << "checkpoint format nozzle-checkpoint v1\n";
  return out.str();
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text(const fs::path &path, const std::string &text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec)
    fail(ErrorKind::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out)
    fail(ErrorKind::Io, "cannot write " + path.string());
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_artifact(const fs::path &path, const char *what, const char *command) {
  if (!fs::exists(path))
    fail(ErrorKind::Dependency, std::string("missing ") + what + " (" + path.string() + "); run `nozzlebench " +
                                    command + "` first");
}

struct Stage {
  Command command;
  int failure_code;
};

void stage_mesh(const RunConfig &c, const RunLayout &layout, std::ostream &log) {
  geometry::MesherOptions opts;
  opts.min_angle_degrees = c.min_angle;
  opts.seed = c.seed;
  auto mesh = geometry::generate_axisym_mesh(c.nozzle, c.sizing, opts);
  for (int k = 0; k < c.refinements; ++k)
    mesh = geometry::refine_uniform(mesh);
  geometry::check_mesh(mesh);
  std::error_code ec;
  fs::create_directories(layout.mesh().parent_path(), ec);
  geometry::save_mesh(layout.mesh().string(), mesh);
  const auto stats = geometry::mesh_stats(mesh);
  json s;
  s["n_elt"] = stats.n_elt;
  s["n_vertices"] = stats.n_vertices;
  s["h_min"] = stats.h_min;
  s["h_max"] = stats.h_max;
  s["h_avg"] = stats.h_avg;
  std::vector<std::size_t> per_region(mesh.region_names.size(), 0);
  for (int r : mesh.region)
    ++per_region[r];
  json regions;
  for (std::size_t k = 0; k < per_region.size(); ++k)
    regions[mesh.region_names[k]] = per_region[k];
  s["triangles_per_region"] = regions;
  write_text(layout.mesh_stats(), s.dump(2) + "\n");
  log << "[mesh] " << stats.n_elt << " triangles, " << stats.n_vertices << " vertices, h in [" << fmt(stats.h_min)
      << ", " << fmt(stats.h_max) << "] m\n";
}

std::shared_ptr<const geometry::AxisymMesh> load_run_mesh(const RunLayout &layout) {
  require_artifact(layout.mesh(), "mesh", "mesh");
  return std::make_shared<const geometry::AxisymMesh>(geometry::load_mesh(layout.mesh().string()));
}

std::string diagnostics_row(int step, double time, const ns::Diagnostics &d) {
  return std::to_string(step) + "," + fmt(time) + "," + fmt(d.divergence_norm) + "," +
         std::to_string(d.nonlinear_iterations) + "," + std::to_string(d.linear_iterations) + "," +
         fmt(d.direct_difference) + "\n";
}

void write_checkpoint_file(const fs::path &path, const ns::SolutionState &state, const ns::FlowCase &fc) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorKind::Io, "cannot write " + path.string());
  ns::write_checkpoint(out, state, fc);
}

void stage_run(const RunConfig &c, const RunLayout &layout, std::ostream &log) {
  ns::FlowCase fc = flow_case(c);
  fc.mesh = load_run_mesh(layout);
  const auto space = std::make_shared<const fem::FunctionSpace>(fc.mesh, fc.order);
  const ns::FlowAssembler assembler(ns::benchmark_problem(fc, space));
  log << "[run] " << c.driver << " driver, P" << fc.order + 1 << "/P" << fc.order << ", " << space->num_total()
      << " dofs, Re_t = " << fmt(fc.re_throat) << ", Q = " << fmt(fc.flow_rate()) << " m^3/s\n";

  const auto start = std::chrono::steady_clock::now();
  std::string diagnostics = "step,time,divergence_norm,nonlinear_iterations,linear_iterations,direct_difference\n";
  json info;
  info["driver"] = c.driver;
  info["dofs"] = space->num_total();
  ns::SolutionState final_state{fem::Field(space), 0.0, 0, {}};
  if (c.driver == "steady") {
    final_state = ns::solve_steady(assembler, fc.solver);
    diagnostics += diagnostics_row(0, 0.0, final_state.diagnostics);
    info["nonlinear_iterations"] = final_state.diagnostics.nonlinear_iterations;
    info["nonlinear_residuals"] = final_state.diagnostics.nonlinear_residuals;
    log << "[run] converged in " << final_state.diagnostics.nonlinear_iterations << " Picard iterations\n";
  } else {
    ns::TransientOptions opts;
    opts.steady_tol = c.steady_tol;
    opts.steady_window = c.steady_window;
    opts.observer = [&](const ns::SolutionState &s) {
      if (c.checkpoint_stride > 0 && s.step % c.checkpoint_stride == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%06d.txt", s.step);
        write_checkpoint_file(layout.checkpoints() / name, s, fc);
      }
      if (s.step % 100 == 0)
        log << "[run] step " << s.step << " t = " << fmt(s.time) << "\n";
    };
    const auto traj = ns::solve_transient(assembler, fc.solver, fc.dt, fc.end_time, opts);
    for (const auto &row : traj.series)
      diagnostics += diagnostics_row(row.step, row.time, row.diagnostics);
    final_state = traj.final_state;
    info["steps"] = traj.series.size();
    info["reached_steady"] = traj.reached_steady;
    info["steadiness"] = traj.steadiness;
    log << "[run] " << traj.series.size() << " steps to t = " << fmt(final_state.time)
        << (traj.reached_steady ? " (steady state detected)" : "") << "\n";
  }
  info["divergence_norm"] = final_state.diagnostics.divergence_norm;
  info["linear_iterations"] = final_state.diagnostics.linear_iterations;
  info["time"] = final_state.time;
  info["step"] = final_state.step;
  write_checkpoint_file(layout.checkpoint(), final_state, fc);
  write_text(layout.diagnostics(), diagnostics);
  write_text(layout.run_info(), info.dump(2) + "\n");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json timing;
  timing["solve_seconds"] = seconds;
  write_text(layout.root / "run" / "timing.json", timing.dump(2) + "\n");
  log << "[run] wrote " << layout.checkpoint().string() << " (" << fmt(seconds) << " s)\n";
}

json samples_json(const std::vector<validation::Sample> &samples) {
  json a = json::array();
  for (const auto &s : samples)
    a.push_back({s.z, s.value});
  return a;
}

std::vector<validation::Sample> samples_from(const json &a) {
  std::vector<validation::Sample> out;
  for (const auto &p : a)
    out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

json profile_json(const validation::NormalizedProfile &p) {
  json j;
  j["label"] = p.label;
  j["kind"] = std::string(validation::to_string(p.kind));
  j["inlet_velocity"] = p.constants.inlet_velocity;
  j["throat_velocity"] = p.constants.throat_velocity;
  j["dynamic_pressure"] = p.constants.dynamic_pressure;
  j["reference_value"] = p.reference_value;
  j["samples"] = samples_json(p.samples);
  return j;
}

validation::NormalizedProfile profile_from(const json &j) {
  validation::NormalizedProfile p;
  p.label = j.at("label").get<std::string>();
  p.kind = j.at("kind").get<std::string>() == "pressure" ? validation::ProfileKind::Pressure
                                                         : validation::ProfileKind::Velocity;
  p.constants = {j.at("inlet_velocity").get<double>(), j.at("throat_velocity").get<double>(),
                 j.at("dynamic_pressure").get<double>()};
  p.reference_value = j.at("reference_value").get<double>();
  p.samples = samples_from(j.at("samples"));
  return p;
}

void stage_validate(const RunConfig &c, const RunLayout &layout, std::ostream &log) {
  ns::FlowCase fc = flow_case(c);
  fc.mesh = load_run_mesh(layout);
  require_artifact(layout.checkpoint(), "run checkpoint", "run");
  require_artifact(layout.run_info(), "run diagnostics", "run");
  const auto space = std::make_shared<const fem::FunctionSpace>(fc.mesh, fc.order);
  std::ifstream in(layout.checkpoint());
  const ns::SolutionState state = ns::read_checkpoint(in, space);
  const json info = json::parse(read_text(layout.run_info()));

  const auto constants = validation::normalization_constants(fc);
  const double z0 = c.nozzle.z_origin;
  const auto zs = validation::linspace(c.nozzle.z_inlet(), c.nozzle.z_outlet(), 401);
  validation::ValidationReport report;
  report.velocity = validation::normalize(validation::extract_centerline(state, zs), constants, z0);
  report.pressure = validation::normalize(validation::extract_wall_pressure(state, zs), constants, z0);
  for (const auto &p : c.velocity_data)
    report.velocity_data.push_back(
        validation::normalize(validation::load_experimental(p, validation::ProfileKind::Velocity), constants, z0));
  for (const auto &p : c.pressure_data) {
    const auto aligned =
        validation::align_pressure_offset(validation::load_experimental(p, validation::ProfileKind::Pressure), z0);
    report.pressure_data.push_back(validation::normalize(aligned, constants, z0));
  }
  report.eq = validation::compute_EQ(state, fc, c.stations);
  if (!report.velocity_data.empty())
    report.ez = validation::compute_Ez(report.velocity, report.velocity_data, c.stations);

  const auto stats = geometry::mesh_stats(*fc.mesh);
  auto &s = report.summary;
  s.emplace_back("case", "Re_t = " + fmt(c.re_throat) + ", rho = " + fmt(c.density) + " kg/m^3, mu = " +
                             fmt(c.viscosity) + " Pa s, P" + std::to_string(c.order + 1) + "/P" +
                             std::to_string(c.order) + ", driver " + c.driver);
  s.emplace_back("flow rate Q [m^3/s]", fmt(fc.flow_rate()));
  s.emplace_back("mean inlet velocity u_i [m/s]", fmt(constants.inlet_velocity));
  s.emplace_back("mean throat velocity u_t [m/s]", fmt(constants.throat_velocity));
  s.emplace_back("rho u_t^2 / 2 [Pa]", fmt(constants.dynamic_pressure));
  s.emplace_back("mesh", std::to_string(stats.n_elt) + " triangles, " + std::to_string(stats.n_vertices) +
                             " vertices, h_min " + fmt(stats.h_min) + ", h_max " + fmt(stats.h_max) + ", h_avg " +
                             fmt(stats.h_avg));
  s.emplace_back("solver", c.solver + ", " + c.nonlinear + (c.solver == "gmres+pcd" ? ", pcd " + c.pcd_mode : ""));
  s.emplace_back("dofs", std::to_string(space->num_total()));
  if (info.contains("nonlinear_iterations"))
    s.emplace_back("Picard iterations", std::to_string(info["nonlinear_iterations"].get<int>()));
  if (info.contains("steps"))
    s.emplace_back("time steps", std::to_string(info["steps"].get<std::size_t>()) + " (final t = " +
                                     fmt(info["time"].get<double>()) + " s)");
  s.emplace_back("divergence norm", fmt(info["divergence_norm"].get<double>()));
  s.emplace_back("experimental datasets", std::to_string(report.velocity_data.size()) + " velocity, " +
                                              std::to_string(report.pressure_data.size()) + " pressure");
  if (report.ez.empty())
    s.emplace_back("E_z", "not computed (no velocity datasets configured)");

  json v;
  v["summary"] = json::array();
  for (const auto &[key, value] : report.summary)
    v["summary"].push_back({key, value});
  v["velocity"] = profile_json(report.velocity);
  v["pressure"] = profile_json(report.pressure);
  v["velocity_data"] = json::array();
  for (const auto &p : report.velocity_data)
    v["velocity_data"].push_back(profile_json(p));
  v["pressure_data"] = json::array();
  for (const auto &p : report.pressure_data)
    v["pressure_data"].push_back(profile_json(p));
  v["ez"] = json::array();
  for (const auto &e : report.ez)
    v["ez"].push_back({e.z, e.computed, e.experimental_mean, e.value});
  v["eq"] = json::array();
  for (const auto &e : report.eq)
    v["eq"].push_back({e.z, e.flow_rate, e.percent});
  write_text(layout.validation(), v.dump(2) + "\n");

  double worst = 0.0;
  for (const auto &e : report.eq)
    worst = std::max(worst, e.percent);
  log << "[validate] max E_Q = " << fmt(worst) << " % over " << report.eq.size() << " sections";
  if (!report.ez.empty()) {
    double worst_z = 0.0;
    for (const auto &e : report.ez)
      worst_z = std::max(worst_z, e.value);
    log << ", max E_z = " << fmt(worst_z);
  }
  log << "\n";
}

void stage_report(const RunLayout &layout, std::ostream &log) {
  require_artifact(layout.validation(), "validation results", "validate");
  json v;
  try {
    v = json::parse(read_text(layout.validation()));
    validation::ValidationReport report;
    for (const auto &kv : v.at("summary"))
      report.summary.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    report.velocity = profile_from(v.at("velocity"));
    report.pressure = profile_from(v.at("pressure"));
    for (const auto &p : v.at("velocity_data"))
      report.velocity_data.push_back(profile_from(p));
    for (const auto &p : v.at("pressure_data"))
      report.pressure_data.push_back(profile_from(p));
    for (const auto &e : v.at("ez"))
      report.ez.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>(), e.at(3).get<double>()});
    for (const auto &e : v.at("eq"))
      report.eq.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
    validation::write_report(report, layout.report());
  } catch (const json::exception &e) {
    fail(ErrorKind::Parse, layout.validation().string() + ": " + e.what());
  }
  log << "[report] wrote " << layout.report().string() << "\n";
}

int code_for(const Error &e, int stage_code) {
  switch (e.kind()) {
  case ErrorKind::Config: return exit_code::config;
  case ErrorKind::Io:
  case ErrorKind::Dependency: return exit_code::io;
  default: return stage_code;
  }
}

} // namespace

int run_pipeline(const RunConfig &config, Command command, std::ostream &log, std::ostream &err) {
  try {
    validate(config);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return exit_code::config;
  }
  const RunLayout layout{config.output_dir};
  std::vector<Stage> stages;
  switch (command) {
  case Command::Mesh: stages = {{Command::Mesh, exit_code::mesh}}; break;
  case Command::Run: stages = {{Command::Run, exit_code::solve}}; break;
  case Command::Validate: stages = {{Command::Validate, exit_code::validate}}; break;
  case Command::Report: stages = {{Command::Report, exit_code::io}}; break;
  case Command::All:
    stages = {{Command::Mesh, exit_code::mesh},
              {Command::Run, exit_code::solve},
              {Command::Validate, exit_code::validate},
              {Command::Report, exit_code::io}};
    break;
  }
  try {
    write_text(layout.effective_config(), effective_config_json(config));
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return exit_code::io;
  }
  for (const auto &stage : stages) {
    try {
      switch (stage.command) {
      case Command::Mesh: stage_mesh(config, layout, log); break;
      case Command::Run: stage_run(config, layout, log); break;
      case Command::Validate: stage_validate(config, layout, log); break;
      case Command::Report: stage_report(layout, log); break;
      case Command::All: break;
      }
    } catch (const Error &e) {
      err << "error [" << to_string(stage.command) << ", " << nozzle::to_string(e.kind()) << "]: " << e.what() << "\n";
      return code_for(e, stage.failure_code);
    } catch (const std::exception &e) {
      err << "error [" << to_string(stage.command) << "]: " << e.what() << "\n";
      return stage.failure_code;
    }
  }
  return exit_code::ok;
}

} // namespace nozzle::runner
