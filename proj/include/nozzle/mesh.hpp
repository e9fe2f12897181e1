#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nozzle::geometry {

/// Meridian-plane point; `r` is the radial and `z` the axial coordinate.
struct Point {
  double r = 0.0;
  double z = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.r + b.r, a.z + b.z}; }
inline Point operator-(Point a, Point b) { return {a.r - b.r, a.z - b.z}; }
inline Point operator*(double s, Point a) { return {s * a.r, s * a.z}; }

enum class BoundaryTag : std::uint8_t { Inlet, Wall, Outlet, Axis };

inline constexpr std::array<BoundaryTag, 4> kAllBoundaryTags{
    BoundaryTag::Inlet, BoundaryTag::Wall, BoundaryTag::Outlet,
    BoundaryTag::Axis};

std::string_view to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(std::string_view name);

using Triangle = std::array<int, 3>;

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::Wall;
};

/// Triangulated (r, z) half-domain. Triangles are counter-clockwise in the
/// (r, z) plane; every edge with a single adjacent triangle carries exactly
/// one boundary tag.
struct AxisymMesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<int> region;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::string> region_names;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double signed_area(std::size_t t) const;
  double total_area() const;
};

struct MeshStats {
  double h_min = 0.0;
  double h_max = 0.0;
  double h_avg = 0.0;
  std::size_t n_elt = 0;
  std::size_t n_vertices = 0;
};

/// Unique undirected edges (a < b), sorted lexicographically.
std::vector<std::array<int, 2>> unique_edges(const AxisymMesh &mesh);

MeshStats mesh_stats(const AxisymMesh &mesh);

/// Splits each triangle into four congruent children through its edge
/// midpoints. Boundary tags and region ids are inherited.
AxisymMesh refine_uniform(const AxisymMesh &mesh);

/// Checks every structural invariant (orientation, conformity, tag
/// completeness, r >= 0, axis edges on r = 0); throws InvalidInput on the
/// first violation.
void check_mesh(const AxisymMesh &mesh);

double min_angle_degrees(const AxisymMesh &mesh, std::size_t t);

/// Plain-text `axisym-mesh v1` format.
void write_mesh(std::ostream &out, const AxisymMesh &mesh);
AxisymMesh read_mesh(std::istream &in);
void save_mesh(const std::string &path, const AxisymMesh &mesh);
AxisymMesh load_mesh(const std::string &path);

} // namespace nozzle::geometry
