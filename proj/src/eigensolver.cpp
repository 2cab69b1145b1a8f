#include "topswap/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace topswap {

namespace {

void deflate_constant(Eigen::VectorXd& v) { v.array() -= v.mean(); }

}  // namespace

EigenResult smallest_on_mean_zero(const LinearOperator& op, std::int64_t size, const EigenOptions& options) {
  if (size < 2) throw std::invalid_argument("eigensolver needs at least two states");
  const std::int64_t dim = size - 1;  // mean-zero subspace
  const int m = static_cast<int>(std::min<std::int64_t>(std::max(options.basis_size, 4), dim));
  const int keep = std::clamp(options.keep, 1, std::max(1, m - 2));

  Eigen::MatrixXd V(size, m), W(size, m), H = Eigen::MatrixXd::Zero(m, m);
  EigenResult result;

  std::mt19937_64 gen(options.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(size);
  for (auto& x : v) x = normal(gen);
  deflate_constant(v);
  v.normalize();

  Eigen::VectorXd w(size);
  int j = 0;
  while (true) {
    V.col(j) = v;
    op(v, w);
    deflate_constant(w);
    W.col(j) = w;
    ++result.matvecs;
    const Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
    H.block(0, j, j + 1, 1) = h;
    H.block(j, 0, 1, j + 1) = h.transpose();
    ++j;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(H.topLeftCorner(j, j));
    const double theta = small.eigenvalues()[0];
    const Eigen::VectorXd s = small.eigenvectors().col(0);
    Eigen::VectorXd y = V.leftCols(j) * s;
    Eigen::VectorXd r = W.leftCols(j) * s - theta * y;
    const double res = r.norm();
    result.value = theta;
    result.residual = res;

    if (res <= options.tolerance * std::max(1.0, std::abs(theta)) || j >= dim) {
      result.converged = true;
      result.vector = std::move(y);
      return result;
    }
    if (result.matvecs >= options.max_matvecs) {
      result.vector = std::move(y);
      return result;
    }

    if (j == m) {
      const Eigen::MatrixXd S = small.eigenvectors().leftCols(keep);
      const Eigen::MatrixXd Vk = V * S;
      const Eigen::MatrixXd Wk = W * S;
      V.leftCols(keep) = Vk;
      W.leftCols(keep) = Wk;
      H.setZero();
      for (int i = 0; i < keep; ++i) H(i, i) = small.eigenvalues()[i];
      j = keep;
    }

    v = r;
    deflate_constant(v);
    for (int pass = 0; pass < 2; ++pass) v -= V.leftCols(j) * (V.leftCols(j).transpose() * v);
    double norm = v.norm();
    if (norm < 1e-13 * res) {
      // lost the Krylov direction to roundoff; continue from a fresh random vector
      for (auto& x : v) x = normal(gen);
      deflate_constant(v);
      for (int pass = 0; pass < 2; ++pass) v -= V.leftCols(j) * (V.leftCols(j).transpose() * v);
      norm = v.norm();
    }
    v /= norm;
  }
}

double dense_smallest_on_mean_zero(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  if (n < 2) throw std::invalid_argument("need at least two states");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n) - J;
  const double shift = 2.0 * (sym.norm() + 1.0);
  const Eigen::MatrixXd b = Q * sym * Q + shift * J;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace topswap
