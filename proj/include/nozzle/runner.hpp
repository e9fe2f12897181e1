#pragma once

#include "nozzle/flow.hpp"
#include "nozzle/mesher.hpp"
#include "nozzle/profile.hpp"
#include "nozzle/validation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nozzle::runner {

inline constexpr int config_schema_version = 1;

/// Everything one benchmark run needs. The on-disk form is a flat JSON object
/// whose keys match the field names below; see README for the schema.
struct RunConfig {
  geometry::NozzleProfile nozzle;
  geometry::NozzleSizing sizing;
  int refinements = 0;
  double min_angle = 25.0;
  std::uint64_t seed = 1;

  double re_throat = 500.0;
  double density = 1056.0;
  double viscosity = 0.0035;
  double dt = 1e-3;
  double end_time = 3.0;
  int order = 1;
  /// "steady" (Picard to convergence) or "transient" (BDF from rest).
  std::string driver = "steady";

  std::string solver = "direct";
  std::string nonlinear = "semi-implicit";
  std::string pcd_mode = "outflow-dirichlet";
  double gmres_tol = 1e-8;
  int gmres_restart = 200;
  int gmres_max_iterations = 2000;
  double nonlinear_tol = 1e-8;
  int max_steady_iterations = 100;
  int max_step_iterations = 50;
  bool cross_check_direct = false;
  /// Transient early stop on ||u^n - u^{n-w}|| / ||u^n|| (0 disables).
  double steady_tol = 0.0;
  int steady_window = 10;
  /// Keep a checkpoint every k steps in transient runs (0: final only).
  int checkpoint_stride = 0;

  std::vector<double> stations = validation::default_stations();
  std::vector<std::filesystem::path> velocity_data;
  std::vector<std::filesystem::path> pressure_data;

  std::filesystem::path output_dir = "nozzle_run";

  bool operator==(const RunConfig &) const = default;
};

/// Parses the JSON text; relative paths are resolved against base_dir.
/// Unknown keys, type mismatches and constraint violations raise
/// ErrorKind::Config naming the key.
RunConfig parse_config_text(std::string_view text, const std::filesystem::path &base_dir = {});
RunConfig parse_config(const std::filesystem::path &path);

/// Checks every constraint (also run by the parsers); throws Config.
void validate(const RunConfig &config);

/// Effective configuration with every key present, paths absolute.
std::string effective_config_json(const RunConfig &config);

/// FlowCase (without mesh) described by the configuration.
ns::FlowCase flow_case(const RunConfig &config);

enum class Command { Mesh, Run, Validate, Report, All };

Command command_from_string(std::string_view name);
std::string_view to_string(Command command);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 1;
inline constexpr int mesh = 2;
inline constexpr int solve = 3;
inline constexpr int validate = 4;
inline constexpr int io = 5;
} // namespace exit_code

/// Executes the command inside config.output_dir and returns the exit code.
/// Progress goes to `log`, failures to `err`.
int run_pipeline(const RunConfig &config, Command command, std::ostream &log, std::ostream &err);

/// Artifact locations inside the run directory.
struct RunLayout {
  std::filesystem::path root;
  std::filesystem::path effective_config() const { return root / "effective_config.json"; }
  std::filesystem::path mesh() const { return root / "mesh" / "mesh.txt"; }
  std::filesystem::path mesh_stats() const { return root / "mesh" / "stats.json"; }
  std::filesystem::path checkpoint() const { return root / "run" / "checkpoint.txt"; }
  std::filesystem::path checkpoints() const { return root / "run" / "checkpoints"; }
  std::filesystem::path diagnostics() const { return root / "run" / "diagnostics.csv"; }
  std::filesystem::path run_info() const { return root / "run" / "run_info.json"; }
  std::filesystem::path validation() const { return root / "validate" / "validation.json"; }
  std::filesystem::path report() const { return root / "report"; }
};

std::string version_text();

} // namespace nozzle::runner
