#include "doctest.h"
#include "oracles.hpp"

#include "nozzle/error.hpp"
#include "nozzle/locator.hpp"
#include "nozzle/mesh.hpp"
#include "nozzle/mesher.hpp"
#include "nozzle/profile.hpp"

#include <set>
#include <sstream>

using namespace nozzle;
using namespace nozzle::geometry;

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

const AxisymMesh &coarse_nozzle() {
  static const AxisymMesh mesh = generate_axisym_mesh(build_nozzle_profile(), NozzleSizing{});
  return mesh;
}

// Edge multiplicities counted straight from the triangle list.
std::map<std::pair<int, int>, int> edge_counts(const AxisymMesh &m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto &t : m.triangles)
    for (int e = 0; e < 3; ++e)
      ++count[std::minmax(t[e], t[(e + 1) % 3])];
  return count;
}

double tag_length(const AxisymMesh &m, BoundaryTag tag) {
  double len = 0.0;
  for (const auto &e : m.boundary_edges)
    if (e.tag == tag)
      len += std::hypot(m.vertices[e.a].r - m.vertices[e.b].r, m.vertices[e.a].z - m.vertices[e.b].z);
  return len;
}

} // namespace

TEST_CASE("nozzle profile defaults and radius function") {
  const NozzleProfile p = build_nozzle_profile();
  CHECK(p.radius(-0.01) == doctest::Approx(0.002));
  CHECK(p.radius(0.01) == doctest::Approx(0.006));
  CHECK(p.radius(p.z_inlet() + 1e-3) == doctest::Approx(0.006));
  CHECK(p.radius_left(0.0) == doctest::Approx(0.002));
  CHECK(p.radius(0.0) == doctest::Approx(0.006));
  // Linear convergent: midway between the two radii halfway along the cone.
  const double zm = p.z_convergent_start() + 0.5 * p.convergent_length;
  CHECK(p.radius(zm) == doctest::Approx(0.004));
  CHECK(p.radius(p.z_throat_start()) == doctest::Approx(0.002));
}

TEST_CASE("nozzle profile rejects degenerate dimensions") {
  ProfileOverrides same;
  same.inlet_radius = 0.002;
  CHECK(kind_of([&] { build_nozzle_profile(same); }) == ErrorKind::InvalidParameter);
  ProfileOverrides zero_cone;
  zero_cone.convergent_length = 0.0;
  CHECK(kind_of([&] { build_nozzle_profile(zero_cone); }) == ErrorKind::InvalidParameter);
  ProfileOverrides negative;
  negative.outlet_length = -1.0;
  CHECK(kind_of([&] { build_nozzle_profile(negative); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("unit square mesh is conforming and fully tagged") {
  const AxisymMesh m = generate_mesh(rectangle_domain(0.0, 1.0, 0.0, 1.0), {0.5});
  CHECK_NOTHROW(check_mesh(m));
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  std::size_t single = 0;
  for (const auto &[edge, n] : edge_counts(m)) {
    CHECK((n == 1 || n == 2));
    single += n == 1;
  }
  CHECK(single == m.boundary_edges.size());
  CHECK(tag_length(m, BoundaryTag::Axis) == doctest::Approx(1.0));
  CHECK(tag_length(m, BoundaryTag::Inlet) == doctest::Approx(1.0));
}

TEST_CASE("nozzle mesh satisfies the structural invariants") {
  const NozzleProfile p = build_nozzle_profile();
  const AxisymMesh &m = coarse_nozzle();
  CHECK_NOTHROW(check_mesh(m));

  double area = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
    area += m.signed_area(t);
  CHECK(std::abs(area - p.meridian_area()) <= 1e-10 * p.meridian_area());

  const auto h = NozzleSizing{}.per_region();
  double worst_angle = 180.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto &tri = m.triangles[t];
    double longest = 0.0;
    for (int e = 0; e < 3; ++e) {
      const Point d = m.vertices[tri[e]] - m.vertices[tri[(e + 1) % 3]];
      longest = std::max(longest, std::hypot(d.r, d.z));
    }
    CHECK(longest <= 2.0 * h[m.region[t]]);
    worst_angle = std::min(worst_angle, min_angle_degrees(m, t));
  }
  CHECK(worst_angle >= 20.0);

  // Tag completeness: every single-use edge is tagged exactly once.
  std::set<std::pair<int, int>> tagged;
  for (const auto &e : m.boundary_edges)
    CHECK(tagged.insert(std::minmax(e.a, e.b)).second);
  for (const auto &[edge, n] : edge_counts(m)) {
    CHECK(n <= 2);
    CHECK((n == 1) == (tagged.count(edge) == 1));
  }
  for (const auto &e : m.boundary_edges)
    if (e.tag == BoundaryTag::Axis)
      CHECK((m.vertices[e.a].r <= 1e-12 && m.vertices[e.b].r <= 1e-12));

  CHECK(tag_length(m, BoundaryTag::Axis) == doctest::Approx(p.z_outlet() - p.z_inlet()));
  CHECK(tag_length(m, BoundaryTag::Inlet) == doctest::Approx(p.inlet_radius));
  CHECK(tag_length(m, BoundaryTag::Outlet) == doctest::Approx(p.inlet_radius));
}

TEST_CASE("throat cross-sections cross at least four element layers") {
  const NozzleProfile p = build_nozzle_profile();
  const AxisymMesh m = generate_axisym_mesh(p, NozzleSizing::uniform(5e-4));
  for (int k = 1; k < 10; ++k) {
    const double z = p.z_throat_start() + 0.1 * k * p.throat_length + 1.234e-7;
    int crossed = 0;
    for (const auto &tri : m.triangles) {
      double lo = 1e300, hi = -1e300;
      for (int v : tri) {
        lo = std::min(lo, m.vertices[v].z);
        hi = std::max(hi, m.vertices[v].z);
      }
      crossed += lo < z && z < hi;
    }
    CHECK(crossed >= 4);
  }
}

TEST_CASE("oversized sizing names the offending region") {
  NozzleSizing sizing;
  sizing.throat = 1.0;
  try {
    generate_axisym_mesh(build_nozzle_profile(), sizing);
    FAIL("expected meshing failure");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::MeshingFailure);
    CHECK(std::string(e.what()).find("throat") != std::string::npos);
  }
}

TEST_CASE("mesh generation is deterministic for a fixed seed") {
  MesherOptions opts;
  opts.seed = 7;
  const auto profile = build_nozzle_profile();
  std::ostringstream a, b;
  write_mesh(a, generate_axisym_mesh(profile, NozzleSizing::uniform(1e-3), opts));
  write_mesh(b, generate_axisym_mesh(profile, NozzleSizing::uniform(1e-3), opts));
  CHECK(a.str() == b.str());
}

TEST_CASE("mesh_stats on a single right triangle") {
  AxisymMesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  const MeshStats s = mesh_stats(m);
  CHECK(s.h_min == doctest::Approx(1.0));
  CHECK(s.h_max == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.h_avg == doctest::Approx((2.0 + std::sqrt(2.0)) / 3.0));
  CHECK(s.n_elt == 1);
  CHECK(kind_of([] { mesh_stats(AxisymMesh{}); }) == ErrorKind::InvalidInput);
}

TEST_CASE("mesh_stats matches a brute-force edge pass") {
  const AxisymMesh &m = coarse_nozzle();
  std::set<std::pair<int, int>> edges;
  for (const auto &t : m.triangles)
    for (int e = 0; e < 3; ++e)
      edges.insert(std::minmax(t[e], t[(e + 1) % 3]));
  double lo = 1e300, hi = 0.0, sum = 0.0;
  for (const auto &[a, b] : edges) {
    const double len = std::hypot(m.vertices[a].r - m.vertices[b].r, m.vertices[a].z - m.vertices[b].z);
    lo = std::min(lo, len);
    hi = std::max(hi, len);
    sum += len;
  }
  const MeshStats s = mesh_stats(m);
  CHECK(s.h_min == doctest::Approx(lo).epsilon(1e-14));
  CHECK(s.h_max == doctest::Approx(hi).epsilon(1e-14));
  CHECK(s.h_avg == doctest::Approx(sum / edges.size()).epsilon(1e-12));
  CHECK(s.n_elt == m.num_triangles());
  CHECK(s.n_vertices == m.num_vertices());
  CHECK(s.h_min <= s.h_avg);
  CHECK(s.h_avg <= s.h_max);
}

TEST_CASE("refine_uniform splits every triangle into four") {
  const AxisymMesh sq = oracle::two_triangle_square();
  const AxisymMesh once = refine_uniform(sq);
  CHECK(once.num_triangles() == 8);
  CHECK(refine_uniform(once).num_triangles() == 32);
  CHECK_NOTHROW(check_mesh(once));
}

TEST_CASE("refine_uniform halves edge lengths and keeps area and tags") {
  const AxisymMesh &m = coarse_nozzle();
  const AxisymMesh fine = refine_uniform(m);
  CHECK_NOTHROW(check_mesh(fine));
  const MeshStats before = mesh_stats(m), after = mesh_stats(fine);
  CHECK(std::abs(after.h_max / before.h_max - 0.5) <= 1e-12);
  CHECK(std::abs(after.h_min / before.h_min - 0.5) <= 1e-12);
  CHECK(after.n_elt == 4 * before.n_elt);

  // Each parent edge yields two halves plus one parallel mid-edge for every
  // adjacent triangle, so the new mean follows from parent multiplicities.
  double weighted = 0.0, count = 0.0;
  for (const auto &[edge, n] : edge_counts(m)) {
    const double len = std::hypot(m.vertices[edge.first].r - m.vertices[edge.second].r,
                                  m.vertices[edge.first].z - m.vertices[edge.second].z);
    weighted += (2 + n) * 0.5 * len;
    count += 2 + n;
  }
  CHECK(after.h_avg == doctest::Approx(weighted / count).epsilon(1e-12));

  CHECK(std::abs(fine.total_area() - m.total_area()) <= 1e-12 * m.total_area());
  for (BoundaryTag tag : kAllBoundaryTags)
    CHECK(tag_length(fine, tag) == doctest::Approx(tag_length(m, tag)).epsilon(1e-12));
}

TEST_CASE("locate_point at vertices and centroids") {
  const AxisymMesh &m = coarse_nozzle();
  const PointLocator locator(m);
  for (std::size_t t = 0; t < m.num_triangles(); t += 97) {
    const auto &tri = m.triangles[t];
    const Point c = (1.0 / 3.0) * (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]);
    const Location loc = locator.locate(c);
    CHECK(loc.triangle == static_cast<int>(t));
    for (double b : loc.bary)
      CHECK(b == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

    const Location at_vertex = locator.locate(m.vertices[tri[1]]);
    const auto &owner = m.triangles[at_vertex.triangle];
    bool has_unit = false;
    for (int k = 0; k < 3; ++k)
      if (owner[k] == tri[1])
        has_unit = std::abs(at_vertex.bary[k] - 1.0) <= 1e-10;
    CHECK(has_unit);
  }
}

TEST_CASE("locate_point agrees with an exhaustive scan") {
  const NozzleProfile p = build_nozzle_profile();
  const AxisymMesh &m = coarse_nozzle();
  const PointLocator locator(m);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uz(p.z_inlet(), p.z_outlet()), u01(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const double z = uz(rng);
    const Point q{0.999 * u01(rng) * p.radius(z), z};
    // Exhaustive oracle: the triangle with the largest minimum barycentric
    // coordinate, computed from scratch.
    int best = -1;
    double best_min = -1e300;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const auto &tri = m.triangles[t];
      const Point a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
      const double det = (b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z);
      const double l1 = ((q.r - a.r) * (c.z - a.z) - (c.r - a.r) * (q.z - a.z)) / det;
      const double l2 = ((b.r - a.r) * (q.z - a.z) - (q.r - a.r) * (b.z - a.z)) / det;
      const double lmin = std::min({1.0 - l1 - l2, l1, l2});
      if (lmin > best_min) {
        best_min = lmin;
        best = static_cast<int>(t);
      }
    }
    if (best_min < 1e-9)
      continue;  // too close to an edge to have a unique owner
    const Location loc = locator.locate(q);
    CHECK(loc.triangle == best);
    CHECK(std::abs(loc.bary[0] + loc.bary[1] + loc.bary[2] - 1.0) <= 1e-12);
    for (double b : loc.bary) {
      CHECK(b >= -1e-10);
      CHECK(b <= 1.0 + 1e-10);
    }
    ++checked;
  }
  CHECK(kind_of([&] { locator.locate({0.01, 0.0 - 0.01}); }) == ErrorKind::NotFound);
  CHECK(kind_of([&] { locate_point(m, {0.001, p.z_outlet() + 0.01}); }) == ErrorKind::NotFound);
}

TEST_CASE("mesh text format round-trips") {
  const AxisymMesh &m = coarse_nozzle();
  std::ostringstream out;
  write_mesh(out, m);
  CHECK(out.str().rfind("axisym-mesh v1\n", 0) == 0);
  std::istringstream in(out.str());
  const AxisymMesh back = read_mesh(in);
  CHECK(back.num_vertices() == m.num_vertices());
  CHECK(back.triangles == m.triangles);
  CHECK(back.region == m.region);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    CHECK(back.vertices[i].r == m.vertices[i].r);
    CHECK(back.vertices[i].z == m.vertices[i].z);
  }
  std::ostringstream again;
  write_mesh(again, back);
  CHECK(again.str() == out.str());
}
