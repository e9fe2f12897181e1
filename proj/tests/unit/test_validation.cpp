#include "doctest.h"
#include "flow_cases.hpp"

#include "nozzle/error.hpp"
#include "nozzle/mesher.hpp"
#include "nozzle/validation.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace nozzle;
using namespace nozzle::validation;
using geometry::Point;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("expected nozzle::Error");
  return ErrorKind::Io;
}

ExperimentalDataset parse(const std::string &text, ProfileKind kind = ProfileKind::Velocity) {
  std::istringstream in(text);
  return parse_experimental(in, kind, "data");
}

fs::path scratch_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("nozzle_validation_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Pipe of radius R, length L with the exact Poiseuille interpolant.
struct PipeState {
  ns::FlowCase flow_case;
  double radius, length;
  ns::SolutionState state;
};

PipeState poiseuille_pipe(int order = 1) {
  const double radius = 0.006, length = 0.06;
  ns::FlowCase c = cases::pipe_case(radius, length, 0.002, order);
  const double ubar = c.inlet_mean_velocity();
  const double grad = 8.0 * c.viscosity * ubar / (radius * radius);
  auto space = cases::space_on(*c.mesh, order);
  auto field = fem::interpolate(space, [&](Point x) {
    return fem::FlowValue{0.0, 2.0 * ubar * (1.0 - x.r * x.r / (radius * radius)), grad * (length - x.z)};
  });
  return {c, radius, length, ns::SolutionState{std::move(field), 0.0, 0, {}}};
}

NormalizedProfile synthetic(const std::vector<double> &z, const std::function<double(double)> &f,
                            std::string label = "synthetic") {
  NormalizedProfile p;
  p.label = std::move(label);
  for (double v : z)
    p.samples.push_back({v, f(v)});
  return p;
}

/// Brute-force point evaluation: barycentric search over every triangle and a
/// Lagrange basis rebuilt on the physical nodes.
double manual_uz(const fem::Field &field, Point x) {
  const auto &space = field.space();
  const auto &mesh = space.mesh();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto &tri = mesh.triangles[t];
    const Point a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double det = (b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z);
    const double l1 = ((x.r - a.r) * (c.z - a.z) - (c.r - a.r) * (x.z - a.z)) / det;
    const double l2 = ((b.r - a.r) * (x.z - a.z) - (x.r - a.r) * (b.z - a.z)) / det;
    if (l1 < -1e-12 || l2 < -1e-12 || 1.0 - l1 - l2 < -1e-12)
      continue;
    const auto dofs = space.velocity().cell_dofs(t);
    std::vector<Point> nodes;
    for (int d : dofs)
      nodes.push_back(space.velocity().dof_point(d));
    const oracle::PhysicalBasis basis(nodes, space.velocity_degree());
    double v = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i)
      v += basis.value(static_cast<int>(i), x) * field.coefficients()[space.uz_dof(dofs[i])];
    return v;
  }
  FAIL("point not found");
  return 0.0;
}

} // namespace

TEST_CASE("load_experimental: formats, ordering, duplicates, errors") {
  const auto two = parse("0 1\n0.1 2");
  CHECK(two.samples.size() == 2);
  CHECK(two.samples[1].value == 2.0);

  const auto ws = parse("-0.02 0.5\n0.0 1.5\n0.03 2.5\n");
  const auto csv = parse("arcLength,normalizedUz\n-0.02,0.5\n0.0,1.5\n0.03,2.5\n");
  REQUIRE(ws.samples.size() == csv.samples.size());
  for (std::size_t i = 0; i < ws.samples.size(); ++i) {
    CHECK(ws.samples[i].z == csv.samples[i].z);
    CHECK(ws.samples[i].value == csv.samples[i].value);
  }

  const auto shuffled = parse("0.3 3\n-0.1 -1\n0.1 1\n0.2 2\n");
  for (std::size_t i = 1; i < shuffled.samples.size(); ++i) {
    CHECK(shuffled.samples[i].z > shuffled.samples[i - 1].z);
    CHECK(shuffled.samples[i].value == doctest::Approx(10.0 * shuffled.samples[i].z));
  }

  const auto dup = parse("0 1\n0 3\n1 5\n");
  CHECK(dup.samples.size() == 2);
  CHECK(dup.samples[0].value == 2.0);

  try {
    parse("0 1\n0.1 x\n");
    FAIL("expected parse error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(kind_of([] { parse("0 1 2\n1 2 3\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse("z,u\n0,1\nz,u\n1,2\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse("0 1\n"); }) == ErrorKind::InsufficientData);
  CHECK(kind_of([] { parse("0 1\n0 2\n"); }) == ErrorKind::InsufficientData);

  const fs::path dir = scratch_dir("load");
  std::ofstream(dir / "lab_A.csv") << "# digitized\narcLength, p\n0.0, 10\n0.05, 20\n";
  const auto loaded = load_experimental(dir / "lab_A.csv", ProfileKind::Pressure);
  CHECK(loaded.label == "lab_A");
  CHECK(loaded.kind == ProfileKind::Pressure);
  CHECK(loaded.samples.size() == 2);
  CHECK(kind_of([&] { load_experimental(dir / "missing.csv", ProfileKind::Velocity); }) == ErrorKind::Io);
}

TEST_CASE("align_pressure_offset") {
  const auto zeroed = parse("-0.1 -4\n0 0\n0.1 3\n", ProfileKind::Pressure);
  const auto same = align_pressure_offset(zeroed);
  for (std::size_t i = 0; i < same.samples.size(); ++i)
    CHECK(std::abs(same.samples[i].value - zeroed.samples[i].value) <= 1e-12);

  const auto constant = align_pressure_offset(parse("-0.1 7\n0.2 7\n", ProfileKind::Pressure));
  for (const auto &s : constant.samples)
    CHECK(s.value == 0.0);
  CHECK(constant.alignment_offset.value() == 7.0);

  const auto raw = parse("-0.07 130\n-0.01 101.5\n0.04 60\n0.09 62\n", ProfileKind::Pressure);
  const auto once = align_pressure_offset(raw);
  CHECK(std::abs(interpolate(once.samples, 0.0).value()) <= 1e-12);
  const auto twice = align_pressure_offset(once);
  for (std::size_t i = 0; i < once.samples.size(); ++i)
    CHECK(std::abs(twice.samples[i].value - once.samples[i].value) <= 1e-12);
  CHECK(kind_of([&] { align_pressure_offset(raw, 0.5); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("wall radius follows the nozzle profile") {
  const auto profile = geometry::build_nozzle_profile();
  const auto mesh = geometry::generate_axisym_mesh(profile, geometry::NozzleSizing{2e-3, 1e-3, 1e-3, 2e-3});
  for (double z : {profile.z_inlet() + 0.01, profile.z_convergent_start() + 0.01, -0.02, 0.05})
    CHECK(wall_radius(mesh, z) == doctest::Approx(profile.radius(z)).epsilon(1e-12));
  CHECK(wall_radius(mesh, profile.z_origin) == doctest::Approx(profile.throat_radius));
  CHECK(kind_of([&] { wall_radius(mesh, 1.0); }) == ErrorKind::NotFound);
}

TEST_CASE("centreline and wall extraction") {
  const auto pipe = poiseuille_pipe();
  const double peak = 2.0 * pipe.flow_case.inlet_mean_velocity();
  const auto zs = linspace(0.0, pipe.length, 13);
  const auto centre = extract_centerline(pipe.state, zs);
  CHECK(centre.kind == ProfileKind::Velocity);
  for (const auto &s : centre.samples)
    CHECK(std::abs(s.value - peak) <= 1e-8 * peak);
  CHECK(centre.samples.front().z == 0.0);
  CHECK(centre.samples.front().value == doctest::Approx(ns::poiseuille_inlet(pipe.flow_case.flow_rate(), 0.012)(0.0)));

  const double grad = 8.0 * pipe.flow_case.viscosity * pipe.flow_case.inlet_mean_velocity() / (pipe.radius * pipe.radius);
  const auto wall = extract_wall_pressure(pipe.state, {0.05, 0.01, 0.03});
  CHECK(wall.samples[0].z == 0.01);
  for (const auto &s : wall.samples)
    CHECK(std::abs(s.value - grad * (pipe.length - s.z)) <= 1e-8 * grad * pipe.length);

  auto space = pipe.state.field.space_ptr();
  const ns::SolutionState flat{fem::interpolate(space, [](Point) { return fem::FlowValue{0.0, 0.0, 4.5}; }), 0, 0, {}};
  for (const auto &s : extract_wall_pressure(flat, zs).samples)
    CHECK(s.value == doctest::Approx(4.5).epsilon(1e-13));
  CHECK(kind_of([&] { extract_centerline(pipe.state, {0.5}); }) == ErrorKind::NotFound);
}

TEST_CASE("wall and centreline pressure agree on a solved pipe") {
  ns::FlowCase c = cases::pipe_case(0.006, 0.06, 0.002, 1);
  const auto state = ns::solve_steady(c);
  const auto zs = linspace(0.005, 0.055, 11);
  const auto wall = extract_wall_pressure(state, zs);
  const double scale = std::abs(wall.samples.front().value);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double centre_p = fem::evaluate_field(state.field, Point{0.0, zs[i]}).p;
    CHECK(std::abs(centre_p - wall.samples[i].value) <= 1e-6 * scale);
  }
}

TEST_CASE("extraction matches brute-force evaluation on the nozzle") {
  const auto profile = geometry::build_nozzle_profile();
  const auto mesh = geometry::generate_axisym_mesh(profile, geometry::NozzleSizing{2e-3, 1e-3, 1e-3, 2e-3});
  for (int order : {1, 2}) {
    auto space = cases::space_on(mesh, order);
    const ns::SolutionState state{fem::interpolate(space, [](Point x) {
                                    return fem::FlowValue{0.0, std::sin(60.0 * x.z) + 3.0 * x.r, std::cos(x.z)};
                                  }),
                                  0, 0, {}};
    std::mt19937_64 rng(order);
    std::uniform_real_distribution<double> u(profile.z_inlet(), profile.z_outlet());
    std::vector<double> zs(40);
    for (auto &z : zs)
      z = u(rng);
    const auto centre = extract_centerline(state, zs);
    for (const auto &s : centre.samples)
      CHECK(std::abs(s.value - manual_uz(state.field, Point{0.0, s.z})) <= 1e-10);
  }
}

TEST_CASE("normalization constants and invertibility") {
  ns::FlowCase c;
  const auto k = normalization_constants(c);
  CHECK(k.inlet_velocity == doctest::Approx(0.04603291471).epsilon(1e-4));
  CHECK(std::abs(k.dynamic_pressure - 90.63) <= 0.1);
  CHECK(k.dynamic_pressure == doctest::Approx(90.62664235).epsilon(1e-4));

  Profile flat{ProfileKind::Velocity, "flat", {}};
  for (double z : linspace(-0.1, 0.1, 5))
    flat.samples.push_back({z, k.inlet_velocity});
  for (const auto &s : normalize(flat, k).samples)
    CHECK(s.value == doctest::Approx(1.0).epsilon(1e-15));

  Profile line{ProfileKind::Pressure, "line", {}};
  for (double z : linspace(-0.1, 0.1, 7))
    line.samples.push_back({z, 250.0 - 1300.0 * z});
  const auto np = normalize(line, k);
  CHECK(std::abs(interpolate(np.samples, 0.0).value()) <= 1e-14);
  CHECK(np.reference_value == doctest::Approx(250.0));

  for (const Profile &p : {flat, line}) {
    const auto back = denormalize(normalize(p, k));
    for (std::size_t i = 0; i < p.samples.size(); ++i)
      CHECK(std::abs(back.samples[i].value - p.samples[i].value) <= 1e-12 * std::abs(p.samples[i].value));
  }

  Profile uncovered{ProfileKind::Pressure, "x", {{0.01, 1.0}, {0.02, 2.0}}};
  CHECK(kind_of([&] { normalize(uncovered, k); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("E_Q: exact interpolant, truncation, ordering, range") {
  for (int order : {1, 2}) {
    const auto pipe = poiseuille_pipe(order);
    const auto zs = linspace(0.001, 0.059, 12);
    const auto eq = compute_EQ(pipe.state, pipe.flow_case, zs);
    REQUIRE(eq.size() == 12);
    for (const auto &e : eq)
      CHECK(e.percent <= 1e-8);

    std::vector<double> reversed(zs.rbegin(), zs.rend());
    const auto eq_rev = compute_EQ(pipe.state, pipe.flow_case, reversed);
    for (std::size_t i = 0; i < zs.size(); ++i)
      CHECK(eq_rev[zs.size() - 1 - i].percent == eq[i].percent);
  }

  const auto pipe = poiseuille_pipe();
  auto space = pipe.state.field.space_ptr();
  const fem::Field uniform = fem::interpolate(space, [](Point) { return fem::FlowValue{0.0, 1.0, 0.0}; });
  const double full = section_flow_rate(uniform, 0.03, pipe.radius);
  const double half = section_flow_rate(uniform, 0.03, 0.5 * pipe.radius);
  CHECK(100.0 * std::abs(half - full) / full == doctest::Approx(75.0).epsilon(1e-12));
  CHECK(kind_of([&] { compute_EQ(pipe.state, pipe.flow_case, {0.2}); }) == ErrorKind::NotFound);
}

TEST_CASE("E_z: self comparison, scaling, averaging, symmetry") {
  const auto zs = linspace(-0.1, 0.1, 21);
  const auto computed = synthetic(zs, [](double z) { return 2.0 + 10.0 * std::exp(-100.0 * z * z); });
  const auto locations = default_stations();
  for (const auto &e : compute_Ez(computed, {computed}, locations))
    CHECK(e.value == 0.0);

  const auto scaled = synthetic(zs, [&](double z) { return 1.1 * interpolate(computed.samples, z).value(); });
  for (const auto &e : compute_Ez(computed, {scaled}, locations))
    CHECK(e.value == doctest::Approx(0.1 / 1.1).epsilon(1e-12));

  const auto above = synthetic(zs, [&](double z) { return interpolate(computed.samples, z).value() + 0.25; }, "a");
  const auto below = synthetic(zs, [&](double z) { return interpolate(computed.samples, z).value() - 0.25; }, "b");
  for (const auto &e : compute_Ez(computed, {above, below}, locations))
    CHECK(e.value <= 1e-15);

  const auto skew = synthetic(zs, [](double z) { return 3.0 + z; }, "c");
  const auto ab = compute_Ez(computed, {above, skew}, locations);
  const auto ba = compute_Ez(computed, {skew, above}, locations);
  const auto dup = compute_Ez(computed, {above, skew, above, skew}, locations);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    CHECK(ab[i].value == doctest::Approx(ba[i].value).epsilon(1e-15));
    CHECK(ab[i].value == doctest::Approx(dup[i].value).epsilon(1e-15));
  }

  const auto near_zero = synthetic(zs, [](double) { return 0.0; });
  const auto tiny = synthetic(zs, [](double) { return 1e-6; });
  for (const auto &e : compute_Ez(tiny, {near_zero}, {0.0}))
    CHECK(e.value == doctest::Approx(1e-6 / ez_floor));

  const auto partial = synthetic(linspace(0.0, 0.1, 5), [](double) { return 1.0; });
  CHECK(kind_of([&] { compute_Ez(computed, {partial}, {-0.05}); }) == ErrorKind::InsufficientData);
  CHECK(kind_of([&] { compute_Ez(partial, {computed}, {-0.05}); }) == ErrorKind::InsufficientData);
  // A location covered by only one of two datasets uses that one.
  const auto one = compute_Ez(computed, {partial, scaled}, {-0.05});
  CHECK(one[0].experimental_mean == doctest::Approx(interpolate(scaled.samples, -0.05).value()));
}

TEST_CASE("write_report: files, empty metrics, round trip, well-formed SVG") {
  ValidationReport empty;
  empty.summary = {{"case", "empty"}};
  const fs::path e = scratch_dir("empty");
  write_report(empty, e);
  CHECK(slurp(e / "metrics.csv") == "z,E_z,E_Q\n");
  CHECK(slurp(e / "profiles_velocity.csv") == "z,computed_norm\n");
  CHECK(read_metrics(e / "metrics.csv").empty());

  ValidationReport r;
  r.summary = {{"case", "Re_t = 500"}, {"mesh", "n_elt 100"}};
  const auto zs = linspace(-0.1, 0.1, 12);
  r.velocity = synthetic(zs, [](double z) { return 2.0 + std::sin(30.0 * z) / 3.0; }, "computed");
  r.velocity_data = {synthetic(linspace(-0.05, 0.05, 4), [](double z) { return 2.1 + z; }, "lab,1 <A&B>")};
  r.pressure = synthetic(zs, [](double z) { return -std::atan(50.0 * z) / 7.0; }, "computed");
  r.ez = compute_Ez(r.velocity, r.velocity_data, linspace(-0.05, 0.05, 4));
  for (double z : zs)
    r.eq.push_back({z, 5.2e-6, 1.0 / 3.0 + z * z});
  const fs::path out = scratch_dir("full");
  write_report(r, out);
  for (const char *f : {"profiles_velocity.csv", "profiles_pressure.csv", "metrics.csv", "report.svg", "summary.txt"})
    CHECK(fs::exists(out / f));

  const auto rows = read_metrics(out / "metrics.csv");
  const auto expected = metrics_rows(r);
  REQUIRE(rows.size() == expected.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::abs(rows[i].z - expected[i].z) <= 1e-9 * std::max(1.0, std::abs(expected[i].z)));
    CHECK(rows[i].ez.has_value() == expected[i].ez.has_value());
    CHECK(rows[i].eq.has_value() == expected[i].eq.has_value());
    if (rows[i].ez)
      CHECK(std::abs(*rows[i].ez - *expected[i].ez) <= 1e-9 * std::max(1.0, std::abs(*expected[i].ez)));
    if (rows[i].eq)
      CHECK(std::abs(*rows[i].eq - *expected[i].eq) <= 1e-9 * std::max(1.0, *expected[i].eq));
  }

  std::istringstream vel(slurp(out / "profiles_velocity.csv"));
  std::string header;
  std::getline(vel, header);
  CHECK(header == "z,computed_norm,lab;1 <A&B>");
  std::string line;
  int n = 0;
  while (std::getline(vel, line)) {
    const double z = std::stod(line.substr(0, line.find(',')));
    const double v = std::stod(line.substr(line.find(',') + 1));
    CHECK(std::abs(v - interpolate(r.velocity.samples, z).value()) <= 1e-9);
    ++n;
  }
  CHECK(n == 12);

  boost::property_tree::ptree tree;
  CHECK_NOTHROW(boost::property_tree::read_xml((out / "report.svg").string(), tree));
  CHECK(tree.get_child("svg").count("g") == 4);

  const std::string summary = slurp(out / "summary.txt");
  CHECK(summary.find("case: Re_t = 500") == 0);
  CHECK(summary.find("E_z definition") != std::string::npos);
  CHECK(summary.find("E_Q definition") != std::string::npos);

  // Bit-stable output.
  const fs::path again = scratch_dir("again");
  write_report(r, again);
  for (const char *f : {"metrics.csv", "report.svg", "summary.txt", "profiles_pressure.csv"})
    CHECK(slurp(out / f) == slurp(again / f));

  std::ofstream(out / "blocker") << "x";
  CHECK(kind_of([&] { write_report(r, out / "blocker" / "sub"); }) == ErrorKind::Io);
}
