#include "topswap/operator_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <stdexcept>

namespace topswap {

const char* operator_kind_name(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Stochastic: return "stochastic";
    case OperatorKind::Generator: return "generator";
    case OperatorKind::QuadraticForm: return "quadratic-form";
  }
  return "unknown";
}

Eigen::VectorXd ProjectorTerm::average(const Eigen::VectorXd& f) const {
  std::vector<double> sum(num_classes, 0.0);
  std::vector<double> count(num_classes, 0.0);
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    sum[class_of[x]] += f[x];
    count[class_of[x]] += 1.0;
  }
  Eigen::VectorXd out(f.size());
  for (Eigen::Index x = 0; x < f.size(); ++x) out[x] = sum[class_of[x]] / count[class_of[x]];
  return out;
}

void ProjectorTerm::add_centered(const Eigen::VectorXd& f, Eigen::VectorXd& out) const {
  const Eigen::VectorXd avg = average(f);
  for (Eigen::Index x = 0; x < f.size(); ++x)
    if (weight[x] != 0.0) out[x] += weight[x] * (f[x] - avg[x]);
}

OperatorMatrix::OperatorMatrix(OperatorKind kind, SparseMatrix sparse, std::vector<ProjectorTerm> projectors)
    : kind_(kind), sparse_(std::move(sparse)), projectors_(std::move(projectors)) {
  if (sparse_.rows() != sparse_.cols()) throw std::invalid_argument("operator must be square");
  for (const auto& p : projectors_)
    if (static_cast<std::int64_t>(p.class_of.size()) != sparse_.rows() ||
        static_cast<std::int64_t>(p.weight.size()) != sparse_.rows())
      throw std::invalid_argument("projector term size mismatch");
  if (kind_ == OperatorKind::Stochastic && !projectors_.empty())
    throw std::invalid_argument("stochastic operators carry no projector terms");
}

Eigen::VectorXd OperatorMatrix::apply(const Eigen::VectorXd& f) const {
  Eigen::VectorXd out = sparse_ * f;
  if (projectors_.empty()) return out;
  Eigen::VectorXd centered = Eigen::VectorXd::Zero(f.size());
  for (const auto& p : projectors_) p.add_centered(f, centered);
  if (kind_ == OperatorKind::Generator)
    out -= centered;
  else
    out += centered;
  return out;
}

Eigen::VectorXd OperatorMatrix::apply_laplacian(const Eigen::VectorXd& f) const {
  switch (kind_) {
    case OperatorKind::Stochastic: return f - sparse_ * f;
    case OperatorKind::Generator: return -apply(f);
    case OperatorKind::QuadraticForm: return apply(f);
  }
  return f;
}

Eigen::MatrixXd OperatorMatrix::to_dense() const {
  const auto n = size();
  Eigen::MatrixXd out = Eigen::MatrixXd(sparse_);
  for (const auto& p : projectors_) {
    std::vector<double> count(p.num_classes, 0.0);
    for (auto x = 0; x < n; ++x) count[p.class_of[x]] += 1.0;
    const double sign = kind_ == OperatorKind::Generator ? -1.0 : 1.0;
    for (auto x = 0; x < n; ++x) {
      if (p.weight[x] == 0.0) continue;
      out(x, x) += sign * p.weight[x];
      for (auto y = 0; y < n; ++y)
        if (p.class_of[y] == p.class_of[x]) out(x, y) -= sign * p.weight[x] / count[p.class_of[x]];
    }
  }
  return out;
}

Eigen::MatrixXd OperatorMatrix::dense_laplacian() const {
  Eigen::MatrixXd a = to_dense();
  switch (kind_) {
    case OperatorKind::Stochastic:
      return Eigen::MatrixXd::Identity(a.rows(), a.cols()) - a;
    case OperatorKind::Generator: return -a;
    case OperatorKind::QuadraticForm: return a;
  }
  return a;
}

double OperatorMatrix::symmetry_defect() const {
  const SparseMatrix t = sparse_.transpose();
  const SparseMatrix diff = sparse_ - t;
  double defect = 0;
  for (std::int64_t r = 0; r < diff.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(diff, r); it; ++it) defect = std::max(defect, std::abs(it.value()));
  for (const auto& p : projectors_) {
    std::vector<double> lo(p.num_classes, INFINITY), hi(p.num_classes, -INFINITY);
    for (std::size_t x = 0; x < p.class_of.size(); ++x) {
      lo[p.class_of[x]] = std::min(lo[p.class_of[x]], p.weight[x]);
      hi[p.class_of[x]] = std::max(hi[p.class_of[x]], p.weight[x]);
    }
    for (std::uint32_t c = 0; c < p.num_classes; ++c)
      if (hi[c] >= lo[c]) defect = std::max(defect, hi[c] - lo[c]);
  }
  return defect;
}

double OperatorMatrix::row_sum_defect() const {
  // projector terms annihilate constants, so only the sparse part matters
  const double target = kind_ == OperatorKind::Stochastic ? 1.0 : 0.0;
  double defect = 0;
  for (std::int64_t r = 0; r < sparse_.outerSize(); ++r) {
    double s = 0;
    for (SparseMatrix::InnerIterator it(sparse_, r); it; ++it) s += it.value();
    defect = std::max(defect, std::abs(s - target));
  }
  return defect;
}

OperatorMatrix OperatorMatrix::combine(double a, const OperatorMatrix& A, double b, const OperatorMatrix& B) {
  if (A.kind() != OperatorKind::QuadraticForm || B.kind() != OperatorKind::QuadraticForm)
    throw std::invalid_argument("combine expects quadratic forms");
  if (A.size() != B.size()) throw std::invalid_argument("combine: size mismatch");
  SparseMatrix s = a * A.sparse_ + b * B.sparse_;
  std::vector<ProjectorTerm> terms;
  for (const auto* src : {&A, &B}) {
    const double c = src == &A ? a : b;
    for (auto p : src->projectors_) {
      for (double& w : p.weight) w *= c;
      terms.push_back(std::move(p));
    }
  }
  return OperatorMatrix(OperatorKind::QuadraticForm, std::move(s), std::move(terms));
}

void OperatorMatrix::write_triplets(std::ostream& os) const {
  const auto n = size();
  os << "row,col,value\n";
  os << std::setprecision(17);
  const double sign = kind_ == OperatorKind::Generator ? -1.0 : 1.0;
  std::vector<std::vector<std::vector<std::int64_t>>> classes;
  for (const auto& p : projectors_) {
    std::vector<std::vector<std::int64_t>> cl(p.num_classes);
    for (std::int64_t x = 0; x < n; ++x) cl[p.class_of[x]].push_back(x);
    classes.push_back(std::move(cl));
  }
  for (std::int64_t r = 0; r < n; ++r) {
    std::map<std::int64_t, double> row;
    for (SparseMatrix::InnerIterator it(sparse_, r); it; ++it) row[it.col()] += it.value();
    for (std::size_t t = 0; t < projectors_.size(); ++t) {
      const auto& p = projectors_[t];
      if (p.weight[r] == 0.0) continue;
      const auto& cl = classes[t][p.class_of[r]];
      row[r] += sign * p.weight[r];
      for (auto y : cl) row[y] -= sign * p.weight[r] / static_cast<double>(cl.size());
    }
    for (const auto& [c, v] : row)
      if (v != 0.0) os << r << ',' << c << ',' << v << '\n';
  }
}

}  // namespace topswap
