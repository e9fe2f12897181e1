#include "doctest.h"

#include "nozzle/error.hpp"
#include "nozzle/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nozzle;
using namespace nozzle::runner;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("nozzle_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error_text(const std::string &text) {
  try {
    parse_config_text(text, fs::temp_directory_path());
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("no config error for " << text);
  return {};
}

// Small nozzle and a low Reynolds number so the whole pipeline runs in seconds.
std::string small_case(const fs::path &out) {
  return R"({"h_inlet": 0.002, "h_convergent": 0.001, "h_throat": 0.001, "h_expansion": 0.002,
             "re_throat": 50, "output_dir": ")" +
         out.string() + "\"}";
}

} // namespace

TEST_CASE("minimal config fills the documented defaults") {
  const RunConfig c = parse_config_text(R"({"re_throat": 500})", "/base");
  CHECK(c.re_throat == 500.0);
  CHECK(c.density == 1056.0);
  CHECK(c.viscosity == 0.0035);
  CHECK(c.dt == 1e-3);
  CHECK(c.order == 1);
  CHECK(c.driver == "steady");
  CHECK(c.solver == "direct");
  CHECK(c.stations.size() == 12);
  CHECK(c.stations.front() == doctest::Approx(-0.1));
  CHECK(c.stations.back() == doctest::Approx(0.1));
  CHECK(c.output_dir == fs::path("/base/nozzle_run"));
  CHECK(c.nozzle == geometry::NozzleProfile{});

  const ns::FlowCase f = flow_case(c);
  CHECK(f.inlet_diameter == doctest::Approx(0.012));
  CHECK(f.throat_diameter == doctest::Approx(0.004));
  CHECK(f.solver.mode == linalg::SolverMode::Direct);
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error_text(R"({"dt": -1})").find("'dt'") != std::string::npos);
  CHECK(config_error_text(R"({"dt": -1})").find("positive") != std::string::npos);
  CHECK(config_error_text(R"({"reynolds": 500})").find("'reynolds': unknown key") != std::string::npos);
  CHECK(config_error_text(R"({"order": 1.5})").find("'order'") != std::string::npos);
  CHECK(config_error_text(R"({"order": 3})").find("'order'") != std::string::npos);
  CHECK(config_error_text(R"({"density": "water"})").find("'density'") != std::string::npos);
  CHECK(config_error_text(R"({"solver": "cg"})").find("'solver'") != std::string::npos);
  CHECK(config_error_text(R"({"h_throat": 0.01})").find("'h_throat'") != std::string::npos);
  CHECK(config_error_text(R"({"stations": [0.5]})").find("'stations'") != std::string::npos);
  CHECK(config_error_text(R"({"velocity_data": ["missing.csv"]})").find("'velocity_data'") != std::string::npos);
  CHECK(config_error_text(R"({"dt": 5, "end_time": 1})").find("'dt'") != std::string::npos);
  CHECK(config_error_text(R"([1, 2])").find("object") != std::string::npos);
  CHECK(config_error_text("{not json").find("JSON") != std::string::npos);
  CHECK(config_error_text(R"({"throat_radius": 0.01})").find("nozzle geometry") != std::string::npos);
}

TEST_CASE("effective config is a parse fixpoint") {
  const fs::path dir = scratch("fixpoint");
  std::ofstream(dir / "v.csv") << "z,u\n-0.2,0.1\n0.2,0.1\n";
  const RunConfig c = parse_config_text(
      R"({"re_throat": 123.25, "order": 2, "driver": "transient", "pcd_mode": "inflow-robin",
          "stations": [-0.05, 0.0, 0.05], "velocity_data": ["v.csv"], "output_dir": "out", "seed": 7,
          "viscosity": 0.00351, "cross_check_direct": true})",
      dir);
  CHECK(c.velocity_data.front() == dir / "v.csv");
  CHECK(c.output_dir == dir / "out");
  const std::string echo = effective_config_json(c);
  const RunConfig again = parse_config_text(echo, "/elsewhere");
  CHECK(again == c);
  CHECK(effective_config_json(again) == echo);

  // Every key is echoed, including the ones left at their defaults.
  for (const char *key : {"\"inlet_radius\"", "\"h_expansion\"", "\"min_angle\"", "\"gmres_restart\"",
                          "\"steady_window\"", "\"checkpoint_stride\"", "\"pressure_data\""})
    CHECK(echo.find(key) != std::string::npos);
}

TEST_CASE("parse_config reads files and resolves paths against their directory") {
  const fs::path dir = scratch("file");
  std::ofstream(dir / "c.json") << R"({"output_dir": "runs/a"})";
  const RunConfig c = parse_config(dir / "c.json");
  CHECK(c.output_dir == dir / "runs" / "a");
  CHECK_THROWS_AS(parse_config(dir / "missing.json"), Error);
}

TEST_CASE("commands round-trip through their names") {
  for (auto c : {Command::Mesh, Command::Run, Command::Validate, Command::Report, Command::All})
    CHECK(command_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(command_from_string("plot"), Error);
  CHECK(version_text().find("config schema 1") != std::string::npos);
}

TEST_CASE("mesh command writes the mesh and consistent stats") {
  const fs::path dir = scratch("mesh");
  const RunConfig c = parse_config_text(small_case(dir / "out"));
  std::ostringstream log, err;
  REQUIRE(run_pipeline(c, Command::Mesh, log, err) == exit_code::ok);
  const RunLayout layout{c.output_dir};
  CHECK(fs::exists(layout.effective_config()));
  CHECK(parse_config_text(slurp(layout.effective_config())) == c);
  const auto mesh = geometry::load_mesh(layout.mesh().string());
  geometry::check_mesh(mesh);
  const auto stats = geometry::mesh_stats(mesh);
  const std::string json = slurp(layout.mesh_stats());
  CHECK(json.find("\"n_elt\": " + std::to_string(stats.n_elt)) != std::string::npos);
  CHECK(stats.h_min > 0.0);
  CHECK(stats.h_min <= stats.h_avg);
  CHECK(stats.h_avg <= stats.h_max);
}

TEST_CASE("missing artifacts give the dependency exit code") {
  const fs::path dir = scratch("dependency");
  const RunConfig c = parse_config_text(small_case(dir / "out"));
  std::ostringstream log, err;
  CHECK(run_pipeline(c, Command::Validate, log, err) == exit_code::io);
  CHECK(err.str().find("nozzlebench mesh") != std::string::npos);

  std::ostringstream err2;
  REQUIRE(run_pipeline(c, Command::Mesh, log, err2) == exit_code::ok);
  CHECK(run_pipeline(c, Command::Validate, log, err2) == exit_code::io);
  CHECK(err2.str().find("nozzlebench run") != std::string::npos);

  std::ostringstream err3;
  CHECK(run_pipeline(c, Command::Report, log, err3) == exit_code::io);
  CHECK(err3.str().find("nozzlebench validate") != std::string::npos);

  RunConfig bad = c;
  bad.dt = -1.0;
  std::ostringstream err4;
  CHECK(run_pipeline(bad, Command::Mesh, log, err4) == exit_code::config);
  CHECK(err4.str().find("'dt'") != std::string::npos);
}

TEST_CASE("solver failures map to the solve exit code") {
  const fs::path dir = scratch("solve_failure");
  RunConfig c = parse_config_text(small_case(dir / "out"));
  c.re_throat = 500.0;
  c.max_steady_iterations = 2;
  std::ostringstream log, err;
  CHECK(run_pipeline(c, Command::All, log, err) == exit_code::solve);
  CHECK(err.str().find("non-convergence") != std::string::npos);
}

TEST_CASE("all produces the artifact set and reruns are byte-identical") {
  const fs::path dir = scratch("all");
  std::ofstream(dir / "u.csv") << "z,u\n-0.2,0.05\n0.0,0.3\n0.2,0.1\n";
  std::ofstream(dir / "p.csv") << "z p\n-0.2 10\n0.0 0\n0.2 -2\n";
  std::string text = small_case(dir / "a");
  text.pop_back();
  text += R"(, "velocity_data": ["u.csv"], "pressure_data": ["p.csv"]})";
  RunConfig a = parse_config_text(text, dir);
  RunConfig b = a;
  b.output_dir = dir / "b";
  std::ostringstream log, err;
  REQUIRE(run_pipeline(a, Command::All, log, err) == exit_code::ok);
  REQUIRE(run_pipeline(b, Command::All, log, err) == exit_code::ok);
  for (const char *f : {"metrics.csv", "summary.txt", "profiles_velocity.csv", "profiles_pressure.csv", "report.svg"}) {
    CAPTURE(f);
    CHECK(fs::exists(RunLayout{a.output_dir}.report() / f));
    CHECK(slurp(RunLayout{a.output_dir}.report() / f) == slurp(RunLayout{b.output_dir}.report() / f));
  }
  for (const auto &p : {RunLayout{a.output_dir}.checkpoint(), RunLayout{a.output_dir}.diagnostics(),
                        RunLayout{a.output_dir}.validation()})
    CHECK(fs::exists(p));
  const auto rows = validation::read_metrics(RunLayout{a.output_dir}.report() / "metrics.csv");
  REQUIRE(rows.size() == 12);
  for (const auto &r : rows) {
    CHECK(r.ez.has_value());
    REQUIRE(r.eq.has_value());
    CHECK(*r.eq < 5.0);
  }
  // Report alone rebuilds the bundle from validation.json.
  fs::remove_all(RunLayout{b.output_dir}.report());
  REQUIRE(run_pipeline(b, Command::Report, log, err) == exit_code::ok);
  CHECK(slurp(RunLayout{a.output_dir}.report() / "metrics.csv") ==
        slurp(RunLayout{b.output_dir}.report() / "metrics.csv"));
}

TEST_CASE("transient runs write a diagnostics row per step and stride checkpoints") {
  const fs::path dir = scratch("transient");
  RunConfig c = parse_config_text(small_case(dir / "out"));
  c.driver = "transient";
  c.dt = 1e-3;
  c.end_time = 5e-3;
  c.checkpoint_stride = 2;
  std::ostringstream log, err;
  REQUIRE(run_pipeline(c, Command::Mesh, log, err) == exit_code::ok);
  REQUIRE(run_pipeline(c, Command::Run, log, err) == exit_code::ok);
  const RunLayout layout{c.output_dir};
  std::istringstream csv(slurp(layout.diagnostics()));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line))
    ++rows;
  CHECK(rows == 5);
  CHECK(fs::exists(layout.checkpoints() / "step_000002.txt"));
  CHECK(fs::exists(layout.checkpoints() / "step_000004.txt"));
  CHECK_FALSE(fs::exists(layout.checkpoints() / "step_000003.txt"));
}
