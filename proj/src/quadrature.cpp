#include "nozzle/quadrature.hpp"

#include "nozzle/error.hpp"

#include <cmath>
#include <numbers>

namespace nozzle::fem {

LineRule gauss_legendre(int n) {
  if (n < 1)
    fail(ErrorKind::InvalidParameter, "gauss_legendre: need at least one point");
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 1 ? x : p1;
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n == 1)
    rule.weights[0] = 1.0;
  return rule;
}

QuadratureRule quadrature_rule(int exactness) {
  if (exactness < 0)
    fail(ErrorKind::InvalidParameter, "quadrature_rule: negative exactness");
  if (exactness > kMaxQuadratureExactness)
    fail(ErrorKind::Unsupported, "quadrature_rule: exactness " + std::to_string(exactness) +
                                     " exceeds the supported maximum of 10");
  // The collapse Jacobian (1 - t) raises the degree in t by one.
  const int n = (exactness + 3) / 2;
  const LineRule line = gauss_legendre(n);
  QuadratureRule rule;
  rule.exactness = exactness;
  // The collapsed rule is averaged over the three cyclic vertex rotations so
  // that integrals of non-polynomial data (the 1/r hoop term) do not depend
  // on which vertex a triangle lists first.
  for (int rot = 0; rot < 3; ++rot)
    for (int j = 0; j < n; ++j) {
      const double t = line.points[j];
      for (int i = 0; i < n; ++i) {
        const double s = line.points[i];
        const double xi = s * (1.0 - t), eta = t;
        const std::array<double, 3> l{1.0 - xi - eta, xi, eta};
        rule.points.push_back({l[rot], l[(rot + 1) % 3], l[(rot + 2) % 3]});
        rule.weights.push_back(line.weights[i] * line.weights[j] * (1.0 - t) / 3.0);
      }
    }
  return rule;
}

} // namespace nozzle::fem
