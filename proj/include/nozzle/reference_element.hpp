#pragma once

#include <array>
#include <span>
#include <vector>

namespace nozzle::fem {

/// Values and reference gradients of every basis function at a set of points,
/// indexed [point][basis].
struct BasisTable {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::array<double, 2>>> gradients;
};

/// Lagrange element of degree 1..3 on the reference triangle. Node order:
/// the three vertices, then (k - 1) nodes on each edge (v0->v1, v1->v2,
/// v2->v0) in edge direction, then interior nodes.
class ReferenceElement {
public:
  explicit ReferenceElement(int degree);

  int degree() const { return degree_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  /// Reference coordinates (xi, eta) of each node.
  const std::vector<std::array<double, 2>> &nodes() const { return nodes_; }

  void evaluate(double xi, double eta, std::span<double> values) const;
  void gradients(double xi, double eta, std::span<std::array<double, 2>> grads) const;

  /// Tabulates at barycentric points (l0, l1, l2).
  BasisTable tabulate(std::span<const std::array<double, 3>> points) const;

private:
  int degree_;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  // coeffs_[m * n + i]: coefficient of monomial m in basis function i.
  std::vector<double> coeffs_;
};

/// Cached immutable reference element per degree.
const ReferenceElement &reference_element(int degree);

/// Free-function form: throws InvalidParameter for degrees outside 1..3.
BasisTable reference_basis_eval(int degree, std::span<const std::array<double, 3>> points);

} // namespace nozzle::fem
