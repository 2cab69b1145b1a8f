#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace topswap {

struct EigenOptions {
  int basis_size = 48;
  int keep = 16;
  double tolerance = 1e-10;        // residual norm, scaled by max(1, |theta|)
  std::int64_t max_matvecs = 1000000;
  std::uint64_t seed = 0x5eed;     // start vector
};

struct EigenResult {
  double value = 0;      // Ritz value
  double residual = 0;   // ||A y - theta y||, a two-sided enclosure radius for some eigenvalue
  std::int64_t matvecs = 0;
  bool converged = false;
  Eigen::VectorXd vector;
};

using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

/// Smallest eigenvalue of a symmetric operator restricted to the orthogonal
/// complement of the constant vector (thick-restart Lanczos, full reorthogonalization).
EigenResult smallest_on_mean_zero(const LinearOperator& op, std::int64_t size, const EigenOptions& options = {});

/// Same, through a dense self-adjoint eigensolve; the constant direction is shifted out of the way.
double dense_smallest_on_mean_zero(const Eigen::MatrixXd& symmetric);

}  // namespace topswap
