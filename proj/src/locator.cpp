#include "nozzle/locator.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nozzle::geometry {

std::array<double, 3> barycentric(const AxisymMesh &mesh, int triangle, Point p) {
  const auto &tri = mesh.triangles[triangle];
  const Point a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
  const double det = (b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z);
  const double l1 = ((p.r - a.r) * (c.z - a.z) - (c.r - a.r) * (p.z - a.z)) / det;
  const double l2 = ((b.r - a.r) * (p.z - a.z) - (p.r - a.r) * (b.z - a.z)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(const AxisymMesh &mesh) : mesh_(mesh) {
  if (mesh.triangles.empty())
    fail(ErrorKind::InvalidInput, "PointLocator: empty mesh");
  lo_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  hi_ = {-lo_.r, -lo_.z};
  for (const auto &v : mesh.vertices) {
    lo_ = {std::min(lo_.r, v.r), std::min(lo_.z, v.z)};
    hi_ = {std::max(hi_.r, v.r), std::max(hi_.z, v.z)};
  }
  const double area = std::max(mesh.total_area(), 1e-300);
  const double cell = std::sqrt(area / static_cast<double>(mesh.triangles.size())) * 2.0;
  nr_ = std::clamp(static_cast<int>((hi_.r - lo_.r) / cell) + 1, 1, 4096);
  nz_ = std::clamp(static_cast<int>((hi_.z - lo_.z) / cell) + 1, 1, 65536);
  cell_r_ = (hi_.r - lo_.r) / nr_;
  cell_z_ = (hi_.z - lo_.z) / nz_;
  if (cell_r_ <= 0.0) cell_r_ = 1.0;
  if (cell_z_ <= 0.0) cell_z_ = 1.0;

  auto cell_range = [&](int t) {
    const auto &tri = mesh.triangles[t];
    double rmin = hi_.r, rmax = lo_.r, zmin = hi_.z, zmax = lo_.z;
    for (int v : tri) {
      rmin = std::min(rmin, mesh.vertices[v].r);
      rmax = std::max(rmax, mesh.vertices[v].r);
      zmin = std::min(zmin, mesh.vertices[v].z);
      zmax = std::max(zmax, mesh.vertices[v].z);
    }
    auto ci = [&](double x, double o, double w, int n) {
      return std::clamp(static_cast<int>(std::floor((x - o) / w)), 0, n - 1);
    };
    return std::array<int, 4>{ci(rmin, lo_.r, cell_r_, nr_), ci(rmax, lo_.r, cell_r_, nr_),
                              ci(zmin, lo_.z, cell_z_, nz_), ci(zmax, lo_.z, cell_z_, nz_)};
  };
  std::vector<int> counts(static_cast<std::size_t>(nr_) * nz_ + 1, 0);
  const int nt = static_cast<int>(mesh.triangles.size());
  for (int t = 0; t < nt; ++t) {
    const auto [i0, i1, j0, j1] = cell_range(t);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        ++counts[static_cast<std::size_t>(j) * nr_ + i + 1];
  }
  for (std::size_t k = 1; k < counts.size(); ++k)
    counts[k] += counts[k - 1];
  offsets_ = counts;
  items_.resize(offsets_.back());
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (int t = 0; t < nt; ++t) {
    const auto [i0, i1, j0, j1] = cell_range(t);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        items_[fill[static_cast<std::size_t>(j) * nr_ + i]++] = t;
  }
}

Location PointLocator::locate(Point p, double tol) const {
  auto not_found = [&]() {
    std::ostringstream msg;
    msg.precision(12);
    msg << "point (r=" << p.r << ", z=" << p.z << ") lies outside the mesh";
    fail(ErrorKind::NotFound, msg.str());
  };
  if (p.r < lo_.r - tol || p.r > hi_.r + tol || p.z < lo_.z - tol || p.z > hi_.z + tol)
    not_found();
  const int i0 = std::clamp(static_cast<int>(std::floor((p.r - tol - lo_.r) / cell_r_)), 0, nr_ - 1);
  const int i1 = std::clamp(static_cast<int>(std::floor((p.r + tol - lo_.r) / cell_r_)), 0, nr_ - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor((p.z - tol - lo_.z) / cell_z_)), 0, nz_ - 1);
  const int j1 = std::clamp(static_cast<int>(std::floor((p.z + tol - lo_.z) / cell_z_)), 0, nz_ - 1);

  Location best;
  double best_score = -std::numeric_limits<double>::max();
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nr_ + i;
      for (int k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
        const int t = items_[k];
        const auto bary = barycentric(mesh_, t, p);
        // Scale barycentric deficits to a distance using the triangle heights.
        const auto &tri = mesh_.triangles[t];
        const double twice_area = 2.0 * mesh_.signed_area(t);
        double score = std::numeric_limits<double>::max();
        for (int v = 0; v < 3; ++v) {
          const Point a = mesh_.vertices[tri[(v + 1) % 3]], b = mesh_.vertices[tri[(v + 2) % 3]];
          const double height = twice_area / std::hypot(b.r - a.r, b.z - a.z);
          score = std::min(score, bary[v] * height);
        }
        if (score > best_score ||
            (score == best_score && t < best.triangle)) {
          best_score = score;
          best = {t, bary};
        }
      }
    }
  }
  if (best.triangle < 0 || best_score < -tol)
    not_found();
  if (std::min({best.bary[0], best.bary[1], best.bary[2]}) < 0.0) {
    double sum = 0.0;
    for (double &b : best.bary) {
      b = std::max(b, 0.0);
      sum += b;
    }
    for (double &b : best.bary)
      b /= sum;
  }
  return best;
}

Location locate_point(const AxisymMesh &mesh, Point p) {
  return PointLocator(mesh).locate(p);
}

} // namespace nozzle::geometry
