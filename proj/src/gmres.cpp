#include "nozzle/gmres.hpp"

#include <cmath>

namespace nozzle::linalg {

LinearOperator as_operator(const CsrMatrix &a) {
  return [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
}

namespace {

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] += alpha * x[i];
}

} // namespace

GmresResult gmres(const LinearOperator &op, std::span<const double> b,
                  const LinearOperator &precond, const GmresOptions &options,
                  std::span<const double> x0) {
  if (!(options.tol > 0.0))
    fail(ErrorKind::InvalidParameter, "gmres: tolerance must be positive");
  if (options.restart < 1)
    fail(ErrorKind::InvalidParameter, "gmres: restart must be at least 1");
  const std::size_t n = b.size();
  if (!x0.empty() && x0.size() != n)
    fail(ErrorKind::InvalidParameter, "gmres: initial guess size mismatch");

  GmresResult result;
  result.x = x0.empty() ? Vector(n, 0.0) : Vector(x0.begin(), x0.end());
  const double bnorm = norm2(b);
  const double target = options.tol * bnorm;

  Vector r(n), w(n), z(n);
  auto true_residual = [&] {
    op(result.x, w);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = b[i] - w[i];
    return norm2(r);
  };
  auto apply_precond = [&](std::span<const double> v, std::span<double> out) {
    if (precond)
      precond(v, out);
    else
      std::copy(v.begin(), v.end(), out.begin());
  };

  double beta = true_residual();
  result.residual_history.push_back(beta);
  Vector best_x = result.x;
  double best_res = beta;
  if (beta <= target)
    return result;

  const int m = options.restart;
  std::vector<Vector> basis;
  std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1), y(m);

  while (result.iterations < options.max_iterations) {
    basis.assign(1, Vector(n));
    for (std::size_t i = 0; i < n; ++i)
      basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    double estimate = beta;
    for (; k < m && result.iterations < options.max_iterations; ++k) {
      apply_precond(basis[k], z);
      op(z, w);
      // Modified Gram-Schmidt.
      for (int j = 0; j <= k; ++j) {
        h[j][k] = dot(w, basis[j]);
        axpy(-h[j][k], basis[j], w);
      }
      h[k + 1][k] = norm2(w);
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
        h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
        h[j][k] = t;
      }
      const double denom = std::hypot(h[k][k], h[k + 1][k]);
      cs[k] = denom == 0.0 ? 1.0 : h[k][k] / denom;
      sn[k] = denom == 0.0 ? 0.0 : h[k + 1][k] / denom;
      const double hk1 = h[k + 1][k];
      h[k][k] = denom;
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      estimate = std::abs(g[k + 1]);
      ++result.iterations;
      result.residual_history.push_back(estimate);
      if (estimate <= target || hk1 == 0.0) {
        ++k;
        break;
      }
      basis.emplace_back(n);
      for (std::size_t i = 0; i < n; ++i)
        basis[k + 1][i] = w[i] / hk1;
    }
    // Back substitution and update x += M V y.
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j)
        s -= h[i][j] * y[j];
      y[i] = h[i][i] == 0.0 ? 0.0 : s / h[i][i];
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < k; ++j)
      axpy(y[j], basis[j], w);
    apply_precond(w, z);
    axpy(1.0, z, result.x);

    beta = true_residual();
    if (beta < best_res) {
      best_res = beta;
      best_x = result.x;
    }
    if (beta <= target)
      return result;
    if (!std::isfinite(beta))
      break;
    result.residual_history.push_back(beta);
  }
  result.x = best_x;
  throw GmresNonConvergence("gmres: relative residual " + std::to_string(best_res / bnorm) +
                                " after " + std::to_string(result.iterations) +
                                " iterations exceeds tolerance " + std::to_string(options.tol),
                            std::move(result));
}

} // namespace nozzle::linalg
