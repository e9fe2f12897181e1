#pragma once

#include <array>
#include <vector>

namespace nozzle::fem {

/// Rule on the reference triangle (0,0), (1,0), (0,1). Points are stored as
/// barycentric triples (l0, l1, l2); the reference coordinates are
/// xi = l1 and eta = l2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int exactness = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureExactness = 10;

/// Collapsed (Duffy) Gauss-Legendre product rule exact for total degree
/// `exactness`, symmetrized over cyclic vertex rotations. All weights are
/// positive and all points strictly interior.
/// Throws Unsupported above kMaxQuadratureExactness.
QuadratureRule quadrature_rule(int exactness);

/// n-point Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
LineRule gauss_legendre(int n);

} // namespace nozzle::fem
