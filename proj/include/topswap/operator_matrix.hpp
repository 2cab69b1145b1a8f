#pragma once

// Operators over a ranked state space: a sparse part plus conditional-average
// (projector) terms, so averaging kernels never materialize dense blocks.

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace topswap {

enum class OperatorKind {
  Stochastic,     // P; Laplacian I - P
  Generator,      // L; Laplacian -L
  QuadraticForm,  // M with Q(f) = f^T M f / N; Laplacian M
};

const char* operator_kind_name(OperatorKind kind);

/// Conditional averaging over a partition of the states. Contributes
/// weight(x) * ((Pi f)(x) - f(x)) to a generator and weight(x) * (f(x) - (Pi f)(x))
/// to a quadratic form, where Pi averages f uniformly over the class of x.
struct ProjectorTerm {
  std::vector<std::uint32_t> class_of;  // class id per state, ids in [0, num_classes)
  std::uint32_t num_classes = 0;
  std::vector<double> weight;           // per state; symmetric iff constant on classes

  /// out += weight .* (f - Pi f)
  void add_centered(const Eigen::VectorXd& f, Eigen::VectorXd& out) const;
  /// Pi f
  Eigen::VectorXd average(const Eigen::VectorXd& f) const;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

class OperatorMatrix {
 public:
  OperatorMatrix(OperatorKind kind, SparseMatrix sparse, std::vector<ProjectorTerm> projectors = {});

  OperatorKind kind() const { return kind_; }
  std::int64_t size() const { return sparse_.rows(); }
  const SparseMatrix& sparse() const { return sparse_; }
  const std::vector<ProjectorTerm>& projectors() const { return projectors_; }

  /// The operator itself: P f, L f or M f.
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  /// I - P, -L or M applied to f; positive semidefinite for every reversible kernel.
  Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& f) const;

  Eigen::MatrixXd to_dense() const;
  Eigen::MatrixXd dense_laplacian() const;

  /// Largest |A(x,y) - A(y,x)| plus the largest within-class spread of projector weights.
  double symmetry_defect() const;
  /// Largest deviation of row sums from 1 (stochastic) or 0 (generator, form).
  double row_sum_defect() const;

  /// a*A + b*B for two quadratic forms on the same space.
  static OperatorMatrix combine(double a, const OperatorMatrix& A, double b, const OperatorMatrix& B);

  /// Writes "row,col,value" lines (0-based ranks, 17 significant digits) of the
  /// fully expanded operator, preceded by a header line.
  void write_triplets(std::ostream& os) const;

 private:
  OperatorKind kind_;
  SparseMatrix sparse_;
  std::vector<ProjectorTerm> projectors_;
};

}  // namespace topswap
