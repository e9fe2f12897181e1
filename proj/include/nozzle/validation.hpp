#pragma once

#include "nozzle/flow.hpp"
#include "nozzle/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nozzle::validation {

enum class ProfileKind { Velocity, Pressure };

std::string_view to_string(ProfileKind kind);

struct Sample {
  double z = 0.0;
  double value = 0.0;
};

/// Linear interpolation in a z-sorted sample list; nullopt outside its range.
std::optional<double> interpolate(const std::vector<Sample> &samples, double z, double tol = 1e-12);

/// Measured profile in dimensional units (m/s or Pa) along the axial
/// coordinate.
struct ExperimentalDataset {
  std::string label;
  ProfileKind kind = ProfileKind::Velocity;
  std::vector<Sample> samples;
  /// Pressure offset already subtracted by align_pressure_offset.
  std::optional<double> alignment_offset;
};

/// Two numeric columns separated by commas or whitespace, one optional
/// header line, blank lines and '#' comments ignored. Samples come out sorted
/// by z with duplicate z values averaged.
ExperimentalDataset parse_experimental(std::istream &in, ProfileKind kind, std::string label);
/// Label defaults to the file stem.
ExperimentalDataset load_experimental(const std::filesystem::path &path, ProfileKind kind);

/// Subtracts the value interpolated at reference_z from every sample. Throws
/// InvalidParameter when reference_z is outside the data.
ExperimentalDataset align_pressure_offset(const ExperimentalDataset &dataset, double reference_z = 0.0);

/// Computed profile in dimensional units.
struct Profile {
  ProfileKind kind = ProfileKind::Velocity;
  std::string label;
  std::vector<Sample> samples;
};

/// Inner wall radius at axial position z, from the Wall-tagged edges of the
/// mesh. At the sudden expansion the smaller radius is returned. Throws
/// NotFound when no wall edge spans z.
double wall_radius(const geometry::AxisymMesh &mesh, double z);

/// u_z on the axis at each z (output sorted by z).
Profile extract_centerline(const ns::SolutionState &state, std::vector<double> z_samples);
/// Pressure on the wall at each z (output sorted by z).
Profile extract_wall_pressure(const ns::SolutionState &state, std::vector<double> z_samples);

struct NormalizationConstants {
  double inlet_velocity = 0.0;
  double throat_velocity = 0.0;
  /// rho * u_t^2 / 2.
  double dynamic_pressure = 0.0;
};

NormalizationConstants normalization_constants(const ns::FlowCase &flow_case);

struct NormalizedProfile {
  ProfileKind kind = ProfileKind::Velocity;
  std::string label;
  std::vector<Sample> samples;
  NormalizationConstants constants;
  /// Pressure subtracted before scaling (p at reference_z); 0 for velocity.
  double reference_value = 0.0;
};

/// Velocity: u / u_i. Pressure: (p - p(reference_z)) / (rho u_t^2 / 2), which
/// needs reference_z inside the sample range (InvalidParameter otherwise).
NormalizedProfile normalize(const Profile &profile, const NormalizationConstants &constants,
                            double reference_z = 0.0);
NormalizedProfile normalize(const ExperimentalDataset &dataset, const NormalizationConstants &constants,
                            double reference_z = 0.0);
Profile denormalize(const NormalizedProfile &profile);

/// 2 pi * integral of u_z r dr over [0, r_max] at height z, composite
/// three-point Gauss over `panels` radial panels.
double section_flow_rate(const fem::Field &field, double z, double r_max, int panels = 64);

struct SectionError {
  double z = 0.0;
  double flow_rate = 0.0;
  /// 100 |Q_num - Q| / Q.
  double percent = 0.0;
};

/// Mass-conservation error at each section against the prescribed flow rate,
/// integrating up to the wall radius.
std::vector<SectionError> compute_EQ(const ns::SolutionState &state, double prescribed_flow_rate,
                                     const std::vector<double> &z_sections);
std::vector<SectionError> compute_EQ(const ns::SolutionState &state, const ns::FlowCase &flow_case,
                                     const std::vector<double> &z_sections);

struct LocationError {
  double z = 0.0;
  double computed = 0.0;
  double experimental_mean = 0.0;
  double value = 0.0;
};

inline constexpr double ez_floor = 1e-3;

/// E_z = |u_comp - mean_k u_k| / max(|mean_k u_k|, ez_floor) with every
/// profile interpolated at the location. Throws InsufficientData when the
/// computed profile or every dataset misses a location.
std::vector<LocationError> compute_Ez(const NormalizedProfile &computed,
                                      const std::vector<NormalizedProfile> &datasets,
                                      const std::vector<double> &locations);

/// n evenly spaced points on [a, b].
std::vector<double> linspace(double a, double b, int n);
/// Default metric stations: 12 points on [-0.1, 0.1].
std::vector<double> default_stations();

extern const char *const ez_definition;
extern const char *const eq_definition;

struct ValidationReport {
  /// Ordered key/value lines for summary.txt (case, mesh, solver).
  std::vector<std::pair<std::string, std::string>> summary;
  NormalizedProfile velocity;
  NormalizedProfile pressure;
  std::vector<NormalizedProfile> velocity_data;
  std::vector<NormalizedProfile> pressure_data;
  std::vector<LocationError> ez;
  std::vector<SectionError> eq;
};

/// Writes profiles_velocity.csv, profiles_pressure.csv, metrics.csv,
/// report.svg and summary.txt into out_dir (created if needed). Numbers use
/// 12 significant digits. Throws Io on failure.
void write_report(const ValidationReport &report, const std::filesystem::path &out_dir);

struct MetricsRow {
  double z = 0.0;
  std::optional<double> ez;
  std::optional<double> eq;
};

/// Rows of metrics.csv: E_z and E_Q merged by station, sorted by z.
std::vector<MetricsRow> metrics_rows(const ValidationReport &report);
std::vector<MetricsRow> read_metrics(const std::filesystem::path &path);

} // namespace nozzle::validation
