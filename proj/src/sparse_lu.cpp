#include "nozzle/sparse_lu.hpp"

#include "nozzle/error.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace nozzle::linalg {

namespace {

constexpr double kBackwardErrorLimit = 1e-10;

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

} // namespace

struct LuSolver::Impl {
  CsrMatrix original;
  Vector row_scale;
  Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>> lu;
};

LuSolver::LuSolver(const CsrMatrix &a) : n_(a.rows()) {
  if (a.rows() != a.cols())
    fail(ErrorKind::InvalidParameter, "LU: matrix is " + std::to_string(a.rows()) + "x" +
                                          std::to_string(a.cols()) + ", not square");
  auto impl = std::make_shared<Impl>();
  impl->original = a;
  impl->row_scale.assign(n_, 1.0);
  const auto off = a.offsets();
  const auto col = a.columns();
  const auto val = a.values();
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(a.nnz());
  for (int i = 0; i < n_; ++i) {
    double row_max = 0.0;
    for (int k = off[i]; k < off[i + 1]; ++k)
      row_max = std::max(row_max, std::abs(val[k]));
    if (row_max == 0.0)
      fail(ErrorKind::SingularMatrix, "LU: row " + std::to_string(i) + " is identically zero");
    impl->row_scale[i] = 1.0 / row_max;
    for (int k = off[i]; k < off[i + 1]; ++k)
      if (val[k] != 0.0)
        triplets.emplace_back(i, col[k], val[k] / row_max);
  }
  EigenSparse m(n_, n_);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  impl->lu.analyzePattern(m);
  impl->lu.factorize(m);
  if (impl->lu.info() != Eigen::Success)
    fail(ErrorKind::SingularMatrix, "LU: factorization failed (" + impl->lu.lastErrorMessage() + ")");
  impl_ = std::move(impl);
}

void LuSolver::solve(std::span<const double> b, std::span<double> x) const {
  if (!impl_)
    fail(ErrorKind::InvalidParameter, "LU: solve before factorization");
  if (static_cast<int>(b.size()) != n_ || static_cast<int>(x.size()) != n_)
    fail(ErrorKind::InvalidParameter, "LU: right-hand side size mismatch");
  Eigen::VectorXd rhs(n_);
  for (int i = 0; i < n_; ++i)
    rhs[i] = b[i] * impl_->row_scale[i];
  const Eigen::VectorXd sol = impl_->lu.solve(rhs);
  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(sol[i]))
      fail(ErrorKind::SingularMatrix, "LU: non-finite solution component");
    x[i] = sol[i];
  }
  const double err = backward_error(impl_->original, x, b);
  if (!(err <= kBackwardErrorLimit))
    fail(ErrorKind::SingularMatrix, "LU: backward error " + std::to_string(err) +
                                        " indicates a numerically singular matrix");
}

Vector LuSolver::solve(std::span<const double> b) const {
  Vector x(n_);
  solve(b, x);
  return x;
}

Vector sparse_lu_solve(const CsrMatrix &a, std::span<const double> b) {
  return LuSolver(a).solve(b);
}

double backward_error(const CsrMatrix &a, std::span<const double> x, std::span<const double> b) {
  Vector r(b.begin(), b.end());
  a.multiply_add(x, r, -1.0);
  const double denom = a.norm_inf() * norm_inf(x) + norm_inf(b);
  return denom == 0.0 ? 0.0 : norm_inf(r) / denom;
}

} // namespace nozzle::linalg
