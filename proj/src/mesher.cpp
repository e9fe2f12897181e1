#include "nozzle/mesher.hpp"

#include "nozzle/error.hpp"
#include "predicates.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

namespace nozzle::geometry {

int PlanarDomain::region_of(double z) const {
  const auto it = std::upper_bound(region_breaks.begin(), region_breaks.end(), z);
  return static_cast<int>(it - region_breaks.begin());
}

double PlanarDomain::area() const {
  double twice = 0.0;
  for (const auto &s : segments) {
    if (!s.tag)
      continue;
    const Point a = vertices[s.a], b = vertices[s.b];
    twice += a.r * b.z - b.r * a.z;
  }
  return 0.5 * twice;
}

PlanarDomain rectangle_domain(double r0, double r1, double z0, double z1) {
  if (!(r0 >= 0.0) || !(r1 > r0) || !(z1 > z0))
    fail(ErrorKind::InvalidParameter, "rectangle_domain: degenerate rectangle");
  PlanarDomain d;
  d.vertices = {{r0, z0}, {r1, z0}, {r1, z1}, {r0, z1}};
  d.segments = {{0, 1, BoundaryTag::Inlet},
                {1, 2, BoundaryTag::Wall},
                {2, 3, BoundaryTag::Outlet},
                {3, 0, r0 == 0.0 ? BoundaryTag::Axis : BoundaryTag::Wall}};
  d.region_names = {"pipe"};
  d.region_extent = {r1 - r0};
  return d;
}

PlanarDomain nozzle_domain(const NozzleProfile &p) {
  validate(p);
  const double ri = p.inlet_radius, rt = p.throat_radius;
  const double zin = p.z_inlet(), zc = p.z_convergent_start(),
               zt = p.z_throat_start(), z0 = p.z_origin, zout = p.z_outlet();
  PlanarDomain d;
  d.vertices = {{0, zin}, {ri, zin}, {ri, zc}, {rt, zt}, {rt, z0}, {ri, z0},
                {ri, zout}, {0, zout}, {0, z0}, {0, zt}, {0, zc}};
  using enum BoundaryTag;
  d.segments = {{0, 1, Inlet}, {1, 2, Wall},  {2, 3, Wall},  {3, 4, Wall},
                {4, 5, Wall},  {5, 6, Wall},  {6, 7, Outlet}, {7, 8, Axis},
                {8, 9, Axis},  {9, 10, Axis}, {10, 0, Axis},
                {10, 2, std::nullopt}, {9, 3, std::nullopt}, {8, 4, std::nullopt}};
  d.region_breaks = {zc, zt, z0};
  d.region_names = {"inlet-pipe", "convergent", "throat", "expansion-pipe"};
  d.region_extent = {ri, rt, rt, ri};
  return d;
}

namespace {

constexpr int kNone = -1;
constexpr int kSuperVertices = 3;

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> nbr{kNone, kNone, kNone};
  bool alive = true;
};

double dist2(Point a, Point b) {
  const double dr = a.r - b.r, dz = a.z - b.z;
  return dr * dr + dz * dz;
}

Point circumcenter(Point a, Point b, Point c) {
  const double bx = b.r - a.r, by = b.z - a.z;
  const double cx = c.r - a.r, cy = c.z - a.z;
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  return {a.r + (cy * b2 - by * c2) / d, a.z + (bx * c2 - cx * b2) / d};
}

/// Incremental Bowyer-Watson Delaunay triangulation inside a super triangle.
class Delaunay {
public:
  explicit Delaunay(Point lo, Point hi) {
    const double span = std::max(hi.r - lo.r, hi.z - lo.z);
    const Point c = 0.5 * (lo + hi);
    const double s = 64.0 * span;
    points_ = {{c.r - 2 * s, c.z - s}, {c.r + 2 * s, c.z - s}, {c.r, c.z + 2 * s}};
    tris_.push_back(Tri{{0, 1, 2}});
    vtri_ = {0, 0, 0};
  }

  const std::vector<Point> &points() const { return points_; }
  const std::vector<Tri> &tris() const { return tris_; }
  const std::vector<int> &created() const { return created_; }
  const Point &point(int v) const { return points_[v]; }

  /// Returns the vertex id, or kNone when p coincides with an existing vertex.
  int insert(Point p) {
    const int start = locate(p);
    for (int v : tris_[start].v)
      if (points_[v].r == p.r && points_[v].z == p.z)
        return kNone;

    ++stamp_;
    if (mark_.size() < tris_.size())
      mark_.resize(tris_.size(), 0);
    cavity_.clear();
    std::vector<int> stack{start};
    mark_[start] = 2 * stamp_;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cavity_.push_back(t);
      for (int n : tris_[t].nbr) {
        if (n == kNone || mark_[n] >= 2 * stamp_)
          continue;
        const auto &nv = tris_[n].v;
        const bool inside = detail::incircle(points_[nv[0]], points_[nv[1]],
                                             points_[nv[2]], p) > 0;
        mark_[n] = inside ? 2 * stamp_ : 2 * stamp_ + 1;
        if (inside)
          stack.push_back(n);
      }
    }

    struct Rim {
      int a, b, outside;
    };
    std::vector<Rim> rim;
    for (int t : cavity_) {
      const Tri &tri = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const int n = tri.nbr[i];
        if (n != kNone && mark_[n] == 2 * stamp_)
          continue;
        rim.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], n});
      }
    }
    for (int t : cavity_) {
      tris_[t].alive = false;
      free_.push_back(t);
    }

    const int pv = static_cast<int>(points_.size());
    points_.push_back(p);
    vtri_.push_back(kNone);
    created_.clear();
    for (const auto &e : rim) {
      if (detail::orient2d(p, points_[e.a], points_[e.b]) <= 0)
        fail(ErrorKind::MeshingFailure, "mesher: cavity is not star-shaped");
      int t;
      if (!free_.empty()) {
        t = free_.back();
        free_.pop_back();
        tris_[t] = Tri{{pv, e.a, e.b}};
      } else {
        t = static_cast<int>(tris_.size());
        tris_.push_back(Tri{{pv, e.a, e.b}});
      }
      tris_[t].nbr[0] = e.outside;
      if (e.outside != kNone) {
        Tri &o = tris_[e.outside];
        for (int j = 0; j < 3; ++j)
          if (o.v[(j + 1) % 3] == e.b && o.v[(j + 2) % 3] == e.a)
            o.nbr[j] = t;
      }
      created_.push_back(t);
    }
    for (int t : created_) {
      Tri &tri = tris_[t];
      for (int u : created_) {
        if (tris_[u].v[1] == tri.v[2])
          tri.nbr[1] = u;
        if (tris_[u].v[2] == tri.v[1])
          tri.nbr[2] = u;
      }
      for (int v : tri.v)
        vtri_[v] = t;
    }
    hint_ = created_.front();
    return pv;
  }

  /// Vertices opposite the edge (a, b) in its adjacent triangles; empty when
  /// the edge is not part of the triangulation.
  std::vector<int> opposite(int a, int b) const {
    std::vector<int> out;
    const int start = vtri_[a];
    int t = start;
    do {
      const Tri &tri = tris_[t];
      int i = 0;
      while (tri.v[i] != a)
        ++i;
      if (tri.v[(i + 1) % 3] == b)
        out.push_back(tri.v[(i + 2) % 3]);
      else if (tri.v[(i + 2) % 3] == b)
        out.push_back(tri.v[(i + 1) % 3]);
      t = tri.nbr[(i + 1) % 3];
    } while (t != kNone && t != start);
    return out;
  }

private:
  int locate(Point p) const {
    int t = (hint_ < static_cast<int>(tris_.size()) && tris_[hint_].alive) ? hint_ : 0;
    while (!tris_[t].alive)
      ++t;
    for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
      const Tri &tri = tris_[t];
      int next = kNone;
      bool outside = false;
      for (int i = 0; i < 3; ++i) {
        if (detail::orient2d(points_[tri.v[(i + 1) % 3]],
                             points_[tri.v[(i + 2) % 3]], p) < 0) {
          next = tri.nbr[i];
          outside = true;
          break;
        }
      }
      if (!outside)
        return t;
      if (next == kNone)
        fail(ErrorKind::MeshingFailure, "mesher: point outside super triangle");
      t = next;
    }
    fail(ErrorKind::MeshingFailure, "mesher: point location did not terminate");
  }

  std::vector<Point> points_;
  std::vector<Tri> tris_;
  std::vector<int> vtri_;
  std::vector<int> free_;
  std::vector<int> created_;
  std::vector<int> cavity_;
  std::vector<long long> mark_;
  long long stamp_ = 0;
  int hint_ = 0;
};

struct SubSegment {
  int a, b;
  std::optional<BoundaryTag> tag;
  bool alive = true;
};

class Refiner {
public:
  Refiner(const PlanarDomain &domain, const std::vector<double> &region_h,
          const MesherOptions &options)
      : domain_(domain), region_h_(region_h), options_(options),
        dt_(bounding_box().first, bounding_box().second) {
    const double theta = options.min_angle_degrees * std::numbers::pi / 180.0;
    max_ratio_ = 1.0 / (2.0 * std::sin(theta));
    for (const auto &s : domain.segments)
      if (s.tag)
        polygon_.push_back({domain.vertices[s.a], domain.vertices[s.b]});
  }

  AxisymMesh run() {
    seed_boundary();
    refine();
    return extract();
  }

private:
  std::pair<Point, Point> bounding_box() const {
    Point lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Point hi{-lo.r, -lo.z};
    for (const auto &v : domain_.vertices) {
      lo = {std::min(lo.r, v.r), std::min(lo.z, v.z)};
      hi = {std::max(hi.r, v.r), std::max(hi.z, v.z)};
    }
    return {lo, hi};
  }

  double segment_size(Point a, Point b) const {
    const double zlo = std::min(a.z, b.z), zhi = std::max(a.z, b.z);
    double h = std::numeric_limits<double>::max();
    for (std::size_t k = 0; k < domain_.num_regions(); ++k) {
      const double lo = k == 0 ? -std::numeric_limits<double>::max()
                               : domain_.region_breaks[k - 1];
      const double hi = k + 1 == domain_.num_regions()
                            ? std::numeric_limits<double>::max()
                            : domain_.region_breaks[k];
      if (zhi >= lo && zlo <= hi)
        h = std::min(h, region_h_[k]);
    }
    return h;
  }

  void seed_boundary() {
    // Pre-split every input segment into pieces no longer than the local size.
    std::vector<Point> pts = domain_.vertices;
    struct Piece {
      int a, b;
      std::optional<BoundaryTag> tag;
    };
    std::vector<Piece> pieces;
    for (const auto &s : domain_.segments) {
      const Point a = domain_.vertices[s.a], b = domain_.vertices[s.b];
      const double len = std::sqrt(dist2(a, b));
      const int n = std::max(1, static_cast<int>(std::ceil(len / segment_size(a, b) - 1e-9)));
      int prev = s.a;
      for (int k = 1; k < n; ++k) {
        const double t = static_cast<double>(k) / n;
        pts.push_back({a.r + t * (b.r - a.r), a.z + t * (b.z - a.z)});
        const int cur = static_cast<int>(pts.size()) - 1;
        pieces.push_back({prev, cur, s.tag});
        prev = cur;
      }
      pieces.push_back({prev, s.b, s.tag});
    }

    std::vector<int> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    std::mt19937_64 rng(options_.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> id(pts.size(), kNone);
    for (int i : order) {
      id[i] = dt_.insert(pts[i]);
      if (id[i] == kNone)
        fail(ErrorKind::MeshingFailure, "mesher: duplicate input vertex");
    }
    for (const auto &p : pieces)
      segments_.push_back({id[p.a], id[p.b], p.tag});
  }

  bool inside_polygon(Point p) const {
    bool inside = false;
    for (const auto &[a, b] : polygon_) {
      if ((a.z > p.z) != (b.z > p.z)) {
        const double r = a.r + (p.z - a.z) * (b.r - a.r) / (b.z - a.z);
        if (p.r < r)
          inside = !inside;
      }
    }
    return inside;
  }

  Point centroid(const Tri &t) const {
    const Point a = dt_.point(t.v[0]), b = dt_.point(t.v[1]), c = dt_.point(t.v[2]);
    return {(a.r + b.r + c.r) / 3.0, (a.z + b.z + c.z) / 3.0};
  }

  bool interior(const Tri &t) const {
    for (int v : t.v)
      if (v < kSuperVertices)
        return false;
    return inside_polygon(centroid(t));
  }

  bool bad(const Tri &t) const {
    const Point a = dt_.point(t.v[0]), b = dt_.point(t.v[1]), c = dt_.point(t.v[2]);
    const double la = dist2(b, c), lb = dist2(c, a), lc = dist2(a, b);
    const double lmax = std::max({la, lb, lc}), lmin = std::min({la, lb, lc});
    const double h = region_h_[domain_.region_of(centroid(t).z)];
    const double hmax = options_.max_edge_factor * h;
    if (lmax > hmax * hmax)
      return true;
    const double area2 = std::abs((b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z));
    // R^2 = la lb lc / (4 area)^2 = la lb lc / (2 area2)^2
    const double r2 = la * lb * lc / (area2 * area2);
    return r2 / 4.0 > max_ratio_ * max_ratio_ * lmin;
  }

  bool encroaches(Point p, const SubSegment &s) const {
    const Point a = dt_.point(s.a), b = dt_.point(s.b);
    const Point m = 0.5 * (a + b);
    return dist2(p, m) <= 0.25 * dist2(a, b);
  }

  bool encroached(const SubSegment &s) const {
    const auto opp = dt_.opposite(s.a, s.b);
    if (opp.empty())
      return true;
    const Point a = dt_.point(s.a), b = dt_.point(s.b);
    for (int c : opp) {
      if (c < kSuperVertices)
        continue;
      const Point pc = dt_.point(c);
      const Point u = a - pc, v = b - pc;
      if (u.r * v.r + u.z * v.z <= 0.0)
        return true;
    }
    return false;
  }

  int insert(Point p) {
    if (dt_.points().size() > options_.max_vertices)
      fail(ErrorKind::MeshingFailure, "mesher: vertex budget exhausted");
    const int v = dt_.insert(p);
    if (v == kNone)
      fail(ErrorKind::MeshingFailure, "mesher: refinement produced a duplicate vertex");
    for (int t : dt_.created())
      tri_queue_.push_back(t);
    for (std::size_t s = 0; s < segments_.size(); ++s)
      if (segments_[s].alive && segments_[s].a != v && segments_[s].b != v &&
          encroaches(p, segments_[s]))
        seg_queue_.push_back(static_cast<int>(s));
    return v;
  }

  void split(int s) {
    SubSegment seg = segments_[s];
    segments_[s].alive = false;
    const Point m = 0.5 * (dt_.point(seg.a) + dt_.point(seg.b));
    const int v = insert(m);
    segments_.push_back({seg.a, v, seg.tag});
    seg_queue_.push_back(static_cast<int>(segments_.size()) - 1);
    segments_.push_back({v, seg.b, seg.tag});
    seg_queue_.push_back(static_cast<int>(segments_.size()) - 1);
  }

  void drain_segments() {
    while (!seg_queue_.empty()) {
      const int s = seg_queue_.front();
      seg_queue_.pop_front();
      if (segments_[s].alive && encroached(segments_[s]))
        split(s);
    }
  }

  void refine() {
    for (std::size_t s = 0; s < segments_.size(); ++s)
      seg_queue_.push_back(static_cast<int>(s));
    for (std::size_t t = 0; t < dt_.tris().size(); ++t)
      tri_queue_.push_back(static_cast<int>(t));

    while (true) {
      drain_segments();
      if (tri_queue_.empty())
        break;
      const int t = tri_queue_.front();
      tri_queue_.pop_front();
      const Tri &tri = dt_.tris()[t];
      if (!tri.alive || !interior(tri) || !bad(tri))
        continue;
      const Point c = circumcenter(dt_.point(tri.v[0]), dt_.point(tri.v[1]),
                                   dt_.point(tri.v[2]));
      std::vector<int> hit;
      for (std::size_t s = 0; s < segments_.size(); ++s)
        if (segments_[s].alive && encroaches(c, segments_[s]))
          hit.push_back(static_cast<int>(s));
      if (hit.empty() && !inside_polygon(c))
        hit.push_back(nearest_boundary_segment(c));
      if (!hit.empty()) {
        for (int s : hit)
          if (segments_[s].alive)
            split(s);
        tri_queue_.push_back(t);
        continue;
      }
      insert(c);
    }
  }

  int nearest_boundary_segment(Point p) const {
    int best = kNone;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      if (!segments_[s].alive || !segments_[s].tag)
        continue;
      const double d = dist2(p, 0.5 * (dt_.point(segments_[s].a) + dt_.point(segments_[s].b)));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(s);
      }
    }
    return best;
  }

  AxisymMesh extract() const {
    AxisymMesh mesh;
    mesh.region_names = domain_.region_names;
    std::vector<int> remap(dt_.points().size(), kNone);
    auto vertex = [&](int v) {
      if (remap[v] == kNone) {
        remap[v] = static_cast<int>(mesh.vertices.size());
        Point p = dt_.point(v);
        if (p.r < 0.0 && p.r > -1e-14)
          p.r = 0.0;
        mesh.vertices.push_back(p);
      }
      return remap[v];
    };
    // Number vertices in insertion order for a deterministic layout.
    std::vector<char> used(dt_.points().size(), 0);
    std::vector<int> kept;
    for (std::size_t t = 0; t < dt_.tris().size(); ++t) {
      const Tri &tri = dt_.tris()[t];
      if (tri.alive && interior(tri)) {
        kept.push_back(static_cast<int>(t));
        for (int v : tri.v)
          used[v] = 1;
      }
    }
    for (std::size_t v = 0; v < used.size(); ++v)
      if (used[v])
        vertex(static_cast<int>(v));
    for (int t : kept) {
      const Tri &tri = dt_.tris()[t];
      mesh.triangles.push_back({remap[tri.v[0]], remap[tri.v[1]], remap[tri.v[2]]});
      mesh.region.push_back(domain_.region_of(centroid(tri).z));
    }
    for (const auto &s : segments_)
      if (s.alive && s.tag)
        mesh.boundary_edges.push_back({remap[s.a], remap[s.b], *s.tag});
    check_mesh(mesh);
    return mesh;
  }

  const PlanarDomain &domain_;
  const std::vector<double> &region_h_;
  MesherOptions options_;
  Delaunay dt_;
  double max_ratio_ = 1.0;
  std::vector<std::pair<Point, Point>> polygon_;
  std::vector<SubSegment> segments_;
  std::deque<int> seg_queue_;
  std::deque<int> tri_queue_;
};

} // namespace

AxisymMesh generate_mesh(const PlanarDomain &domain,
                         const std::vector<double> &region_h,
                         const MesherOptions &options) {
  if (region_h.size() != domain.num_regions())
    fail(ErrorKind::InvalidParameter, "generate_mesh: one target size per region required");
  for (std::size_t k = 0; k < region_h.size(); ++k) {
    const std::string name = k < domain.region_names.size()
                                 ? domain.region_names[k]
                                 : "region" + std::to_string(k);
    if (!(region_h[k] > 0.0) || !std::isfinite(region_h[k]))
      fail(ErrorKind::InvalidParameter, "target size for region '" + name + "' must be positive");
    if (k < domain.region_extent.size() && !(region_h[k] < domain.region_extent[k]))
      fail(ErrorKind::MeshingFailure,
           "target size " + std::to_string(region_h[k]) + " m exceeds the radial extent of region '" +
               name + "'");
  }
  if (!(options.min_angle_degrees > 0.0 && options.min_angle_degrees <= 30.0))
    fail(ErrorKind::InvalidParameter, "generate_mesh: min angle must lie in (0, 30] degrees");
  if (!(options.max_edge_factor > 0.0))
    fail(ErrorKind::InvalidParameter, "generate_mesh: max edge factor must be positive");
  Refiner refiner(domain, region_h, options);
  return refiner.run();
}

AxisymMesh generate_axisym_mesh(const NozzleProfile &profile,
                                const NozzleSizing &sizing,
                                const MesherOptions &options) {
  return generate_mesh(nozzle_domain(profile), sizing.per_region(), options);
}

} // namespace nozzle::geometry
