#pragma once

#include "nozzle/csr.hpp"

#include <memory>
#include <span>

namespace nozzle::linalg {

/// Sparse LU factorization (COLAMD ordering, partial pivoting) of a row
/// equilibrated copy of the matrix. Immutable once factorized, so concurrent
/// solves are safe. Throws SingularMatrix when the factorization breaks down
/// or a solve fails the backward-error check.
class LuSolver {
public:
  LuSolver() = default;
  explicit LuSolver(const CsrMatrix &a);

  int size() const { return n_; }
  bool factorized() const { return static_cast<bool>(impl_); }

  void solve(std::span<const double> b, std::span<double> x) const;
  Vector solve(std::span<const double> b) const;

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  int n_ = 0;
};

/// One-shot factorize and solve.
Vector sparse_lu_solve(const CsrMatrix &a, std::span<const double> b);

/// Backward error ||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf).
double backward_error(const CsrMatrix &a, std::span<const double> x, std::span<const double> b);

} // namespace nozzle::linalg
