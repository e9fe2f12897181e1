#pragma once

#include "nozzle/csr.hpp"
#include "nozzle/error.hpp"

#include <functional>
#include <span>

namespace nozzle::linalg {

/// y = Op(x); x and y never alias.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

LinearOperator as_operator(const CsrMatrix &a);

struct GmresOptions {
  double tol = 1e-8;
  int restart = 200;
  int max_iterations = 2000;
};

struct GmresResult {
  Vector x;
  int iterations = 0;
  /// Residual 2-norms: the initial residual, then one entry per inner
  /// iteration (Arnoldi estimate), restarting from the true residual.
  std::vector<double> residual_history;
};

/// Raised when max_iterations is exhausted; carries the best iterate.
class GmresNonConvergence : public Error {
public:
  GmresNonConvergence(const std::string &what, GmresResult best)
      : Error(ErrorKind::NonConvergence, what), best_(std::move(best)) {}
  const GmresResult &best() const { return best_; }

private:
  GmresResult best_;
};

/// Restarted GMRES with optional right preconditioner M: solves A M y = b and
/// returns x = M y, so the monitored residual is the true one. Stops when
/// ||b - A x||_2 <= tol ||b||_2.
GmresResult gmres(const LinearOperator &op, std::span<const double> b,
                  const LinearOperator &precond = {}, const GmresOptions &options = {},
                  std::span<const double> x0 = {});

} // namespace nozzle::linalg
