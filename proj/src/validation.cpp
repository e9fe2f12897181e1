#include "nozzle/validation.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace nozzle::validation {

namespace fs = std::filesystem;
using geometry::Point;

std::string_view to_string(ProfileKind kind) {
  return kind == ProfileKind::Velocity ? "velocity" : "pressure";
}

std::optional<double> interpolate(const std::vector<Sample> &samples, double z, double tol) {
  if (samples.empty() || z < samples.front().z - tol || z > samples.back().z + tol)
    return std::nullopt;
  if (samples.size() == 1)
    return samples.front().value;
  const auto hi = std::lower_bound(samples.begin(), samples.end(), z,
                                   [](const Sample &s, double v) { return s.z < v; });
  if (hi == samples.begin())
    return samples.front().value;
  if (hi == samples.end())
    return samples.back().value;
  if (hi->z == z)
    return hi->value;
  const auto lo = hi - 1;
  const double t = (z - lo->z) / (hi->z - lo->z);
  return (1.0 - t) * lo->value + t * hi->value;
}

namespace {

std::optional<double> parse_number(const std::string &token) {
  if (token.empty())
    return std::nullopt;
  char *end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::vector<std::string> split_columns(const std::string &line) {
  std::string s = line;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::replace(s.begin(), s.end(), '\t', ' ');
  std::istringstream ls(s);
  std::vector<std::string> out;
  for (std::string tok; ls >> tok;)
    out.push_back(tok);
  return out;
}

std::vector<Sample> sort_and_merge(std::vector<Sample> raw) {
  std::stable_sort(raw.begin(), raw.end(), [](const Sample &a, const Sample &b) { return a.z < b.z; });
  std::vector<Sample> out;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < raw.size() && raw[j].z == raw[i].z)
      sum += raw[j++].value;
    out.push_back({raw[i].z, sum / static_cast<double>(j - i)});
    i = j;
  }
  return out;
}

} // namespace

ExperimentalDataset parse_experimental(std::istream &in, ProfileKind kind, std::string label) {
  std::vector<Sample> raw;
  std::string line;
  int line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto cols = split_columns(line);
    if (cols.empty())
      continue;
    const auto z = cols.size() == 2 ? parse_number(cols[0]) : std::nullopt;
    const auto v = cols.size() == 2 ? parse_number(cols[1]) : std::nullopt;
    if (!z || !v) {
      const bool looks_like_header = header_allowed && cols.size() == 2 && !parse_number(cols[0]) && !parse_number(cols[1]);
      if (looks_like_header) {
        header_allowed = false;
        continue;
      }
      fail(ErrorKind::Parse, label + ": line " + std::to_string(line_no) + ": expected two numeric columns, got '" +
                                 line + "'");
    }
    header_allowed = false;
    raw.push_back({*z, *v});
  }
  ExperimentalDataset d;
  d.label = std::move(label);
  d.kind = kind;
  d.samples = sort_and_merge(std::move(raw));
  if (d.samples.size() < 2)
    fail(ErrorKind::InsufficientData, d.label + ": need at least 2 distinct samples, found " +
                                          std::to_string(d.samples.size()));
  return d;
}

ExperimentalDataset load_experimental(const fs::path &path, ProfileKind kind) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::Io, "cannot open experimental data file " + path.string());
  return parse_experimental(in, kind, path.stem().string());
}

ExperimentalDataset align_pressure_offset(const ExperimentalDataset &dataset, double reference_z) {
  const auto ref = interpolate(dataset.samples, reference_z);
  if (!ref)
    fail(ErrorKind::InvalidParameter, dataset.label + ": reference z = " + std::to_string(reference_z) +
                                          " is outside the data range");
  ExperimentalDataset out = dataset;
  for (auto &s : out.samples)
    s.value -= *ref;
  out.alignment_offset = dataset.alignment_offset.value_or(0.0) + *ref;
  return out;
}

double wall_radius(const geometry::AxisymMesh &mesh, double z) {
  const double span = mesh.vertices.empty() ? 1.0 : [&] {
    double lo = mesh.vertices[0].z, hi = lo;
    for (const auto &v : mesh.vertices) {
      lo = std::min(lo, v.z);
      hi = std::max(hi, v.z);
    }
    return std::max(hi - lo, 1e-300);
  }();
  const double tol = 1e-12 * span;
  double best = std::numeric_limits<double>::infinity();
  for (const auto &e : mesh.boundary_edges) {
    if (e.tag != geometry::BoundaryTag::Wall)
      continue;
    const Point a = mesh.vertices[e.a], b = mesh.vertices[e.b];
    const double lo = std::min(a.z, b.z), hi = std::max(a.z, b.z);
    if (z < lo - tol || z > hi + tol)
      continue;
    if (hi - lo <= tol) {
      best = std::min({best, a.r, b.r});
      continue;
    }
    const double t = std::clamp((z - a.z) / (b.z - a.z), 0.0, 1.0);
    best = std::min(best, a.r + t * (b.r - a.r));
  }
  if (!std::isfinite(best))
    fail(ErrorKind::NotFound, "no wall edge spans z = " + std::to_string(z));
  return best;
}

namespace {

Profile extract(const ns::SolutionState &state, std::vector<double> z_samples, ProfileKind kind) {
  std::sort(z_samples.begin(), z_samples.end());
  const auto &space = state.field.space();
  Profile out;
  out.kind = kind;
  out.label = "computed";
  for (double z : z_samples) {
    try {
      const double r = kind == ProfileKind::Velocity ? 0.0 : wall_radius(space.mesh(), z);
      const auto v = fem::evaluate_field(state.field, Point{r, z});
      out.samples.push_back({z, kind == ProfileKind::Velocity ? v.uz : v.p});
    } catch (const Error &e) {
      if (e.kind() != ErrorKind::NotFound)
        throw;
      fail(ErrorKind::NotFound, "sample z = " + std::to_string(z) + " is outside the domain");
    }
  }
  return out;
}

} // namespace

Profile extract_centerline(const ns::SolutionState &state, std::vector<double> z_samples) {
  return extract(state, std::move(z_samples), ProfileKind::Velocity);
}

Profile extract_wall_pressure(const ns::SolutionState &state, std::vector<double> z_samples) {
  return extract(state, std::move(z_samples), ProfileKind::Pressure);
}

NormalizationConstants normalization_constants(const ns::FlowCase &flow_case) {
  NormalizationConstants c;
  c.inlet_velocity = flow_case.inlet_mean_velocity();
  c.throat_velocity = flow_case.throat_mean_velocity();
  c.dynamic_pressure = 0.5 * flow_case.density * c.throat_velocity * c.throat_velocity;
  return c;
}

NormalizedProfile normalize(const Profile &profile, const NormalizationConstants &constants, double reference_z) {
  if (!(constants.inlet_velocity > 0.0) || !(constants.dynamic_pressure > 0.0))
    fail(ErrorKind::InvalidParameter, "normalization constants must be positive");
  NormalizedProfile out;
  out.kind = profile.kind;
  out.label = profile.label;
  out.constants = constants;
  if (profile.kind == ProfileKind::Pressure) {
    const auto ref = interpolate(profile.samples, reference_z);
    if (!ref)
      fail(ErrorKind::InvalidParameter, profile.label + ": pressure profile does not cover z = " +
                                            std::to_string(reference_z));
    out.reference_value = *ref;
  }
  const double scale = profile.kind == ProfileKind::Velocity ? constants.inlet_velocity : constants.dynamic_pressure;
  for (const auto &s : profile.samples)
    out.samples.push_back({s.z, (s.value - out.reference_value) / scale});
  return out;
}

NormalizedProfile normalize(const ExperimentalDataset &dataset, const NormalizationConstants &constants,
                            double reference_z) {
  return normalize(Profile{dataset.kind, dataset.label, dataset.samples}, constants, reference_z);
}

Profile denormalize(const NormalizedProfile &profile) {
  const double scale = profile.kind == ProfileKind::Velocity ? profile.constants.inlet_velocity
                                                              : profile.constants.dynamic_pressure;
  Profile out{profile.kind, profile.label, {}};
  for (const auto &s : profile.samples)
    out.samples.push_back({s.z, s.value * scale + profile.reference_value});
  return out;
}

double section_flow_rate(const fem::Field &field, double z, double r_max, int panels) {
  if (panels < 1 || !(r_max > 0.0))
    fail(ErrorKind::InvalidParameter, "section_flow_rate: need panels >= 1 and r_max > 0");
  const double nodes[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double h = r_max / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * h;
    for (int q = 0; q < 3; ++q) {
      const double r = mid + 0.5 * h * nodes[q];
      sum += weights[q] * 0.5 * h * fem::evaluate_field(field, Point{r, z}).uz * r;
    }
  }
  return 2.0 * std::numbers::pi * sum;
}

std::vector<SectionError> compute_EQ(const ns::SolutionState &state, double prescribed_flow_rate,
                                     const std::vector<double> &z_sections) {
  if (!(prescribed_flow_rate > 0.0))
    fail(ErrorKind::InvalidParameter, "compute_EQ: prescribed flow rate must be positive");
  std::vector<SectionError> out;
  for (double z : z_sections) {
    double r_wall = 0.0;
    try {
      r_wall = wall_radius(state.field.space().mesh(), z);
    } catch (const Error &) {
      fail(ErrorKind::NotFound, "section z = " + std::to_string(z) + " is outside the domain");
    }
    const double q = section_flow_rate(state.field, z, r_wall);
    out.push_back({z, q, 100.0 * std::abs(q - prescribed_flow_rate) / prescribed_flow_rate});
  }
  return out;
}

std::vector<SectionError> compute_EQ(const ns::SolutionState &state, const ns::FlowCase &flow_case,
                                     const std::vector<double> &z_sections) {
  return compute_EQ(state, flow_case.flow_rate(), z_sections);
}

std::vector<LocationError> compute_Ez(const NormalizedProfile &computed, const std::vector<NormalizedProfile> &datasets,
                                      const std::vector<double> &locations) {
  std::vector<LocationError> out;
  for (double z : locations) {
    const auto c = interpolate(computed.samples, z);
    if (!c)
      fail(ErrorKind::InsufficientData, "computed profile does not cover z = " + std::to_string(z));
    double sum = 0.0;
    int count = 0;
    for (const auto &d : datasets)
      if (const auto v = interpolate(d.samples, z)) {
        sum += *v;
        ++count;
      }
    if (count == 0)
      fail(ErrorKind::InsufficientData, "no experimental dataset covers z = " + std::to_string(z));
    const double mean = sum / count;
    out.push_back({z, *c, mean, std::abs(*c - mean) / std::max(std::abs(mean), ez_floor)});
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1)
    fail(ErrorKind::InvalidParameter, "linspace: need at least one point");
  if (n == 1)
    return {a};
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = a + (b - a) * i / (n - 1);
  out.back() = b;
  return out;
}

std::vector<double> default_stations() { return linspace(-0.1, 0.1, 12); }

const char *const ez_definition =
    "E_z(z) = |u_comp(z) - mean_k u_k(z)| / max(|mean_k u_k(z)|, 1e-3), normalized centreline velocities, "
    "datasets linearly interpolated";
const char *const eq_definition =
    "E_Q(z) = 100 |Q_num(z) - Q| / Q, Q_num = 2 pi int_0^r_wall(z) u_z r dr (64 panels x 3-point Gauss), "
    "Q the prescribed flow rate";

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_label(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream &out, const fs::path &path) {
  out.flush();
  if (!out)
    fail(ErrorKind::Io, "failed writing " + path.string());
}

void write_profiles(const NormalizedProfile &computed, const std::vector<NormalizedProfile> &data,
                    const fs::path &path) {
  auto out = open_out(path);
  out << "z,computed_norm";
  for (const auto &d : data)
    out << "," << csv_label(d.label);
  out << "\n";
  for (const auto &s : computed.samples) {
    out << fmt(s.z) << "," << fmt(s.value);
    for (const auto &d : data) {
      out << ",";
      if (const auto v = interpolate(d.samples, s.z))
        out << fmt(*v);
    }
    out << "\n";
  }
  finish(out, path);
}

std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<Sample> points;
  bool markers = false;
};

const char *const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

void svg_panel(std::ostream &out, double x0, double y0, double w, double h, const std::string &title,
               const std::string &ylabel, const std::vector<Series> &series) {
  double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin, vmin = zmin, vmax = -zmin;
  for (const auto &s : series)
    for (const auto &p : s.points) {
      zmin = std::min(zmin, p.z);
      zmax = std::max(zmax, p.z);
      vmin = std::min(vmin, p.value);
      vmax = std::max(vmax, p.value);
    }
  if (!std::isfinite(zmin)) {
    zmin = 0.0, zmax = 1.0, vmin = 0.0, vmax = 1.0;
  }
  if (zmax - zmin <= 0.0)
    zmax = zmin + 1.0;
  if (vmax - vmin <= 0.0) {
    vmin -= 0.5;
    vmax += 0.5;
  }
  const double ml = 60.0, mr = 15.0, mt = 30.0, mb = 40.0;
  const double pw = w - ml - mr, ph = h - mt - mb;
  auto px = [&](double z) { return x0 + ml + (z - zmin) / (zmax - zmin) * pw; };
  auto py = [&](double v) { return y0 + mt + (1.0 - (v - vmin) / (vmax - vmin)) * ph; };

  out << "<g>\n";
  out << "<rect x=\"" << fmt(x0 + ml) << "\" y=\"" << fmt(y0 + mt) << "\" width=\"" << fmt(pw) << "\" height=\""
      << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fmt(x0 + w / 2) << "\" y=\"" << fmt(y0 + 18) << "\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  out << "<text x=\"" << fmt(x0 + ml + pw / 2) << "\" y=\"" << fmt(y0 + h - 8)
      << "\" text-anchor=\"middle\" font-size=\"11\">z [m]</text>\n";
  out << "<text x=\"" << fmt(x0 + 12) << "\" y=\"" << fmt(y0 + mt + ph / 2) << "\" font-size=\"11\" transform=\"rotate(-90 "
      << fmt(x0 + 12) << " " << fmt(y0 + mt + ph / 2) << ")\" text-anchor=\"middle\">" << xml_escape(ylabel)
      << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double z = zmin + (zmax - zmin) * k / 4.0, v = vmin + (vmax - vmin) * k / 4.0;
    out << "<text x=\"" << fmt(px(z)) << "\" y=\"" << fmt(y0 + mt + ph + 14)
        << "\" text-anchor=\"middle\" font-size=\"9\">" << fmt(z) << "</text>\n";
    out << "<text x=\"" << fmt(x0 + ml - 4) << "\" y=\"" << fmt(py(v) + 3)
        << "\" text-anchor=\"end\" font-size=\"9\">" << fmt(v) << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto &s = series[i];
    const char *colour = palette[i % std::size(palette)];
    if (s.markers) {
      for (const auto &p : s.points)
        out << "<circle cx=\"" << fmt(px(p.z)) << "\" cy=\"" << fmt(py(p.value)) << "\" r=\"2.5\" fill=\"" << colour
            << "\"/>\n";
    } else if (!s.points.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < s.points.size(); ++k)
        out << (k ? " " : "") << fmt(px(s.points[k].z)) << "," << fmt(py(s.points[k].value));
      out << "\"/>\n";
    }
    out << "<text x=\"" << fmt(x0 + ml + 6) << "\" y=\"" << fmt(y0 + mt + 12 + 12 * static_cast<double>(i))
        << "\" font-size=\"10\" fill=\"" << colour << "\">" << xml_escape(s.label) << "</text>\n";
  }
  out << "</g>\n";
}

std::vector<Series> profile_series(const NormalizedProfile &computed, const std::vector<NormalizedProfile> &data) {
  std::vector<Series> s{{"computed", computed.samples, false}};
  for (const auto &d : data)
    s.push_back({d.label, d.samples, true});
  return s;
}

} // namespace

std::vector<MetricsRow> metrics_rows(const ValidationReport &report) {
  std::map<double, MetricsRow> rows;
  for (const auto &e : report.ez) {
    rows[e.z].z = e.z;
    rows[e.z].ez = e.value;
  }
  for (const auto &e : report.eq) {
    rows[e.z].z = e.z;
    rows[e.z].eq = e.percent;
  }
  std::vector<MetricsRow> out;
  for (auto &[z, row] : rows)
    out.push_back(row);
  return out;
}

void write_report(const ValidationReport &report, const fs::path &out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    fail(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  write_profiles(report.velocity, report.velocity_data, out_dir / "profiles_velocity.csv");
  write_profiles(report.pressure, report.pressure_data, out_dir / "profiles_pressure.csv");

  {
    const auto path = out_dir / "metrics.csv";
    auto out = open_out(path);
    out << "z,E_z,E_Q\n";
    for (const auto &row : metrics_rows(report))
      out << fmt(row.z) << "," << (row.ez ? fmt(*row.ez) : "") << "," << (row.eq ? fmt(*row.eq) : "") << "\n";
    finish(out, path);
  }

  {
    const auto path = out_dir / "report.svg";
    auto out = open_out(path);
    const double w = 480.0, h = 320.0;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(2 * w) << "\" height=\"" << fmt(2 * h)
        << "\" viewBox=\"0 0 " << fmt(2 * w) << " " << fmt(2 * h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg_panel(out, 0, 0, w, h, "Centreline axial velocity", "u_z / u_i",
              profile_series(report.velocity, report.velocity_data));
    svg_panel(out, w, 0, w, h, "Wall pressure", "(p - p(0)) / (rho u_t^2 / 2)",
              profile_series(report.pressure, report.pressure_data));
    std::vector<Sample> ez, eq;
    for (const auto &e : report.ez)
      ez.push_back({e.z, e.value});
    for (const auto &e : report.eq)
      eq.push_back({e.z, e.percent});
    svg_panel(out, 0, h, w, h, "Validation metric E_z", "E_z", {{"E_z", ez, true}});
    svg_panel(out, w, h, w, h, "Mass conservation E_Q", "E_Q [%]", {{"E_Q", eq, true}});
    out << "</svg>\n";
    finish(out, path);
  }

  {
    const auto path = out_dir / "summary.txt";
    auto out = open_out(path);
    for (const auto &[key, value] : report.summary)
      out << key << ": " << value << "\n";
    out << "E_z definition: " << ez_definition << "\n";
    out << "E_Q definition: " << eq_definition << "\n";
    double worst_q = 0.0, worst_z = 0.0;
    for (const auto &e : report.eq)
      worst_q = std::max(worst_q, e.percent);
    for (const auto &e : report.ez)
      worst_z = std::max(worst_z, e.value);
    out << "max E_Q [%]: " << (report.eq.empty() ? std::string("n/a") : fmt(worst_q)) << "\n";
    out << "max E_z: " << (report.ez.empty() ? std::string("n/a") : fmt(worst_z)) << "\n";
    finish(out, path);
  }
}

std::vector<MetricsRow> read_metrics(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "z,E_z,E_Q")
    fail(ErrorKind::Parse, path.string() + ": missing 'z,E_z,E_Q' header");
  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');)
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    const auto z = cells.size() == 3 ? parse_number(cells[0]) : std::nullopt;
    if (!z)
      fail(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) + ": malformed row");
    MetricsRow row{*z, parse_number(cells[1]), parse_number(cells[2])};
    if ((!cells[1].empty() && !row.ez) || (!cells[2].empty() && !row.eq))
      fail(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) + ": malformed number");
    rows.push_back(row);
  }
  return rows;
}

} // namespace nozzle::validation
