#include "nozzle/mesh.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace nozzle::geometry {

namespace {

double length(Point a, Point b) { return std::hypot(b.r - a.r, b.z - a.z); }

std::array<int, 2> ordered(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

} // namespace

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
  case BoundaryTag::Inlet: return "inlet";
  case BoundaryTag::Wall: return "wall";
  case BoundaryTag::Outlet: return "outlet";
  case BoundaryTag::Axis: return "axis";
  }
  return "unknown";
}

BoundaryTag boundary_tag_from_string(std::string_view name) {
  for (BoundaryTag tag : kAllBoundaryTags)
    if (to_string(tag) == name)
      return tag;
  fail(ErrorKind::Parse, "unknown boundary tag '" + std::string(name) + "'");
}

double AxisymMesh::signed_area(std::size_t t) const {
  const auto &tri = triangles[t];
  const Point a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return 0.5 * ((b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z));
}

double AxisymMesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t)
    sum += signed_area(t);
  return sum;
}

std::vector<std::array<int, 2>> unique_edges(const AxisymMesh &mesh) {
  std::vector<std::array<int, 2>> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const auto &tri : mesh.triangles)
    for (int i = 0; i < 3; ++i)
      edges.push_back(ordered(tri[i], tri[(i + 1) % 3]));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

MeshStats mesh_stats(const AxisymMesh &mesh) {
  if (mesh.triangles.empty())
    fail(ErrorKind::InvalidInput, "mesh_stats: mesh has no triangles");
  MeshStats stats;
  stats.h_min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  const auto edges = unique_edges(mesh);
  for (const auto &[a, b] : edges) {
    const double h = length(mesh.vertices[a], mesh.vertices[b]);
    stats.h_min = std::min(stats.h_min, h);
    stats.h_max = std::max(stats.h_max, h);
    sum += h;
  }
  stats.h_avg = sum / static_cast<double>(edges.size());
  stats.n_elt = mesh.triangles.size();
  stats.n_vertices = mesh.vertices.size();
  return stats;
}

AxisymMesh refine_uniform(const AxisymMesh &mesh) {
  check_mesh(mesh);
  const auto edges = unique_edges(mesh);
  std::map<std::array<int, 2>, int> midpoint;
  AxisymMesh fine;
  fine.region_names = mesh.region_names;
  fine.vertices = mesh.vertices;
  fine.vertices.reserve(mesh.vertices.size() + edges.size());
  for (const auto &e : edges) {
    midpoint.emplace(e, static_cast<int>(fine.vertices.size()));
    fine.vertices.push_back(0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]));
  }
  auto mid = [&](int a, int b) { return midpoint.at(ordered(a, b)); };

  fine.triangles.reserve(4 * mesh.triangles.size());
  fine.region.reserve(4 * mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto [v0, v1, v2] = mesh.triangles[t];
    const int m01 = mid(v0, v1), m12 = mid(v1, v2), m20 = mid(v2, v0);
    fine.triangles.push_back({v0, m01, m20});
    fine.triangles.push_back({m01, v1, m12});
    fine.triangles.push_back({m20, m12, v2});
    fine.triangles.push_back({m01, m12, m20});
    for (int k = 0; k < 4; ++k)
      fine.region.push_back(mesh.region.empty() ? 0 : mesh.region[t]);
  }
  fine.boundary_edges.reserve(2 * mesh.boundary_edges.size());
  for (const auto &be : mesh.boundary_edges) {
    const int m = mid(be.a, be.b);
    fine.boundary_edges.push_back({be.a, m, be.tag});
    fine.boundary_edges.push_back({m, be.b, be.tag});
  }
  return fine;
}

double min_angle_degrees(const AxisymMesh &mesh, std::size_t t) {
  const auto &tri = mesh.triangles[t];
  double smallest = 180.0;
  for (int i = 0; i < 3; ++i) {
    const Point p = mesh.vertices[tri[i]];
    const Point u = mesh.vertices[tri[(i + 1) % 3]] - p;
    const Point v = mesh.vertices[tri[(i + 2) % 3]] - p;
    const double cross = std::abs(u.r * v.z - u.z * v.r);
    const double dot = u.r * v.r + u.z * v.z;
    smallest = std::min(smallest, std::atan2(cross, dot) * 180.0 / std::numbers::pi);
  }
  return smallest;
}

void check_mesh(const AxisymMesh &mesh) {
  auto bad = [](const std::string &what) {
    fail(ErrorKind::InvalidInput, "invalid mesh: " + what);
  };
  if (mesh.triangles.empty())
    bad("no triangles");
  if (!mesh.region.empty() && mesh.region.size() != mesh.triangles.size())
    bad("region id count differs from triangle count");
  const int nv = static_cast<int>(mesh.vertices.size());
  for (const auto &v : mesh.vertices)
    if (v.r < 0.0 || !std::isfinite(v.r) || !std::isfinite(v.z))
      bad("vertex with negative or non-finite radius");

  std::map<std::array<int, 2>, int> multiplicity;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &tri = mesh.triangles[t];
    for (int i : tri)
      if (i < 0 || i >= nv)
        bad("triangle vertex index out of range");
    if (!(mesh.signed_area(t) > 0.0))
      bad("triangle " + std::to_string(t) + " is not positively oriented");
    for (int i = 0; i < 3; ++i)
      ++multiplicity[ordered(tri[i], tri[(i + 1) % 3])];
  }
  std::size_t single = 0;
  for (const auto &[edge, count] : multiplicity) {
    if (count > 2)
      bad("edge shared by more than two triangles");
    if (count == 1)
      ++single;
  }
  std::map<std::array<int, 2>, int> tagged;
  for (const auto &be : mesh.boundary_edges) {
    const auto key = ordered(be.a, be.b);
    const auto it = multiplicity.find(key);
    if (it == multiplicity.end() || it->second != 1)
      bad("tagged edge is not a boundary edge");
    if (++tagged[key] > 1)
      bad("boundary edge carries more than one tag");
    if (be.tag == BoundaryTag::Axis &&
        (std::abs(mesh.vertices[be.a].r) > 1e-12 ||
         std::abs(mesh.vertices[be.b].r) > 1e-12))
      bad("axis-tagged edge off r = 0");
  }
  if (tagged.size() != single)
    bad("untagged boundary edge");
}

void write_mesh(std::ostream &out, const AxisymMesh &mesh) {
  out << "axisym-mesh v1\n";
  out << std::setprecision(17);
  out << mesh.vertices.size() << '\n';
  for (const auto &v : mesh.vertices)
    out << v.r << ' ' << v.z << '\n';
  out << mesh.triangles.size() << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &tri = mesh.triangles[t];
    out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' '
        << (mesh.region.empty() ? 0 : mesh.region[t]) << '\n';
  }
  auto edges = mesh.boundary_edges;
  std::sort(edges.begin(), edges.end(), [](const auto &x, const auto &y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  out << edges.size() << '\n';
  for (const auto &be : edges)
    out << be.a << ' ' << be.b << ' ' << to_string(be.tag) << '\n';
}

AxisymMesh read_mesh(std::istream &in) {
  std::string header;
  std::getline(in, header);
  if (header != "axisym-mesh v1")
    fail(ErrorKind::Parse, "mesh file: expected header 'axisym-mesh v1'");
  auto read_count = [&](const char *what) {
    long long n = -1;
    if (!(in >> n) || n < 0)
      fail(ErrorKind::Parse, std::string("mesh file: bad ") + what + " count");
    return static_cast<std::size_t>(n);
  };
  AxisymMesh mesh;
  mesh.vertices.resize(read_count("vertex"));
  for (auto &v : mesh.vertices)
    if (!(in >> v.r >> v.z))
      fail(ErrorKind::Parse, "mesh file: bad vertex line");
  const std::size_t nt = read_count("triangle");
  mesh.triangles.resize(nt);
  mesh.region.resize(nt);
  int max_region = 0;
  for (std::size_t t = 0; t < nt; ++t) {
    auto &tri = mesh.triangles[t];
    if (!(in >> tri[0] >> tri[1] >> tri[2] >> mesh.region[t]))
      fail(ErrorKind::Parse, "mesh file: bad triangle line");
    max_region = std::max(max_region, mesh.region[t]);
  }
  mesh.boundary_edges.resize(read_count("boundary edge"));
  for (auto &be : mesh.boundary_edges) {
    std::string tag;
    if (!(in >> be.a >> be.b >> tag))
      fail(ErrorKind::Parse, "mesh file: bad boundary edge line");
    be.tag = boundary_tag_from_string(tag);
  }
  for (int r = 0; r <= max_region; ++r)
    mesh.region_names.push_back("region" + std::to_string(r));
  check_mesh(mesh);
  return mesh;
}

void save_mesh(const std::string &path, const AxisymMesh &mesh) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
  if (!out)
    fail(ErrorKind::Io, "failed writing mesh to '" + path + "'");
}

AxisymMesh load_mesh(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::Io, "cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

} // namespace nozzle::geometry
