#include "nozzle/reference_element.hpp"

#include "nozzle/error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace nozzle::fem {

ReferenceElement::ReferenceElement(int degree) : degree_(degree) {
  if (degree < 1 || degree > 3)
    fail(ErrorKind::InvalidParameter,
         "reference element degree " + std::to_string(degree) + " not in {1, 2, 3}");
  const double k = degree;
  const std::array<std::array<double, 2>, 3> v{{{0, 0}, {1, 0}, {0, 1}}};
  for (const auto &p : v)
    nodes_.push_back(p);
  for (int e = 0; e < 3; ++e) {
    const auto a = v[e], b = v[(e + 1) % 3];
    for (int j = 1; j < degree; ++j)
      nodes_.push_back({a[0] + j / k * (b[0] - a[0]), a[1] + j / k * (b[1] - a[1])});
  }
  if (degree == 3)
    nodes_.push_back({1.0 / 3.0, 1.0 / 3.0});

  for (int total = 0; total <= degree; ++total)
    for (int b = 0; b <= total; ++b)
      exponents_.push_back({total - b, b});

  const int n = num_nodes();
  Eigen::MatrixXd vandermonde(n, n);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m)
      vandermonde(i, m) = std::pow(nodes_[i][0], exponents_[m][0]) *
                          std::pow(nodes_[i][1], exponents_[m][1]);
  const Eigen::MatrixXd inv = vandermonde.fullPivLu().inverse();
  coeffs_.resize(static_cast<std::size_t>(n) * n);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      coeffs_[m * n + i] = inv(m, i);
}

void ReferenceElement::evaluate(double xi, double eta, std::span<double> values) const {
  const int n = num_nodes();
  std::fill(values.begin(), values.end(), 0.0);
  for (int m = 0; m < n; ++m) {
    const double mono = std::pow(xi, exponents_[m][0]) * std::pow(eta, exponents_[m][1]);
    for (int i = 0; i < n; ++i)
      values[i] += coeffs_[m * n + i] * mono;
  }
}

void ReferenceElement::gradients(double xi, double eta,
                                 std::span<std::array<double, 2>> grads) const {
  const int n = num_nodes();
  for (auto &g : grads)
    g = {0.0, 0.0};
  for (int m = 0; m < n; ++m) {
    const int a = exponents_[m][0], b = exponents_[m][1];
    const double dxi = a == 0 ? 0.0 : a * std::pow(xi, a - 1) * std::pow(eta, b);
    const double deta = b == 0 ? 0.0 : b * std::pow(xi, a) * std::pow(eta, b - 1);
    for (int i = 0; i < n; ++i) {
      grads[i][0] += coeffs_[m * n + i] * dxi;
      grads[i][1] += coeffs_[m * n + i] * deta;
    }
  }
}

BasisTable ReferenceElement::tabulate(std::span<const std::array<double, 3>> points) const {
  BasisTable table;
  const int n = num_nodes();
  table.values.assign(points.size(), std::vector<double>(n));
  table.gradients.assign(points.size(), std::vector<std::array<double, 2>>(n));
  for (std::size_t q = 0; q < points.size(); ++q) {
    evaluate(points[q][1], points[q][2], table.values[q]);
    gradients(points[q][1], points[q][2], table.gradients[q]);
  }
  return table;
}

const ReferenceElement &reference_element(int degree) {
  static const ReferenceElement p1(1), p2(2), p3(3);
  switch (degree) {
  case 1: return p1;
  case 2: return p2;
  case 3: return p3;
  default:
    fail(ErrorKind::InvalidParameter,
         "reference element degree " + std::to_string(degree) + " not in {1, 2, 3}");
  }
}

BasisTable reference_basis_eval(int degree, std::span<const std::array<double, 3>> points) {
  return reference_element(degree).tabulate(points);
}

} // namespace nozzle::fem
