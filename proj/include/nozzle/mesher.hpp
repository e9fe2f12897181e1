#pragma once

#include "nozzle/mesh.hpp"
#include "nozzle/profile.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nozzle::geometry {

/// Planar straight-line graph describing a meridian domain. Boundary
/// segments carry a tag and must form one closed counter-clockwise loop;
/// untagged segments are interior region interfaces. Regions are the axial
/// slabs separated by `region_breaks`.
struct PlanarDomain {
  struct Segment {
    int a = 0;
    int b = 0;
    std::optional<BoundaryTag> tag;
  };

  std::vector<Point> vertices;
  std::vector<Segment> segments;
  std::vector<double> region_breaks;
  std::vector<std::string> region_names;
  std::vector<double> region_extent;

  std::size_t num_regions() const { return region_breaks.size() + 1; }
  int region_of(double z) const;
  /// Area enclosed by the tagged boundary loop.
  double area() const;
};

/// Rectangle [r0, r1] x [z0, z1] as a single region. The left side is the
/// axis when r0 == 0 and a wall otherwise; bottom is inlet, top outlet.
PlanarDomain rectangle_domain(double r0, double r1, double z0, double z1);

/// Nozzle half-domain with four regions: inlet pipe, convergent, throat and
/// expansion pipe.
PlanarDomain nozzle_domain(const NozzleProfile &profile);

struct NozzleSizing {
  double inlet = 1e-3;
  double convergent = 5e-4;
  double throat = 3e-4;
  double expansion = 1e-3;

  static NozzleSizing uniform(double h) { return {h, h, h, h}; }
  std::vector<double> per_region() const {
    return {inlet, convergent, throat, expansion};
  }

  bool operator==(const NozzleSizing &) const = default;
};

struct MesherOptions {
  /// Triangles with a smaller interior angle are refined.
  double min_angle_degrees = 25.0;
  /// Triangles whose longest edge exceeds this multiple of the region's
  /// target size are refined.
  double max_edge_factor = 1.3;
  std::uint64_t seed = 1;
  std::size_t max_vertices = 2'000'000;
};

/// Conforming Delaunay refinement of the domain with per-region target edge
/// lengths. Throws MeshingFailure (naming the region) when a target size is
/// not smaller than the region's radial extent.
AxisymMesh generate_mesh(const PlanarDomain &domain,
                         const std::vector<double> &region_h,
                         const MesherOptions &options = {});

AxisymMesh generate_axisym_mesh(const NozzleProfile &profile,
                                const NozzleSizing &sizing,
                                const MesherOptions &options = {});

} // namespace nozzle::geometry
