#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ltvobs/expr.hpp"

namespace ltv {

/// Matrix of closed-form scalar expressions of time, stored row-major.
class TvMatrix {
 public:
  TvMatrix() = default;
  TvMatrix(int rows, int cols, std::vector<ScalarExpr> entries);

  static TvMatrix parse(const std::vector<std::vector<std::string>>& rows);
  static TvMatrix constant(const Eigen::MatrixXd& m);
  static TvMatrix zero(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return entries_.empty(); }
  bool is_square() const { return rows_ == cols_; }
  bool is_constant() const;

  const ScalarExpr& at(int i, int j) const { return entries_[static_cast<std::size_t>(i * cols_ + j)]; }
  std::span<const ScalarExpr> entries() const { return entries_; }

  // EvalError from an entry is rethrown with the entry's row-major index.
  Eigen::MatrixXd eval(double t) const;
  void eval_into(double t, Eigen::MatrixXd& out) const;

  std::vector<std::vector<std::string>> to_strings() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<ScalarExpr> entries_;
};

TvMatrix transpose(const TvMatrix& m);
// Entrywise negation; always wraps a new negation node.
TvMatrix negate(const TvMatrix& m);
// Entry (i,j) is the left-to-right sum of products lhs(i,k)*rhs(k,j).
TvMatrix multiply(const TvMatrix& lhs, const TvMatrix& rhs);
TvMatrix subtract(const TvMatrix& lhs, const TvMatrix& rhs);
// Unwraps every -(-x) pair in every entry.
TvMatrix strip_double_negation(const TvMatrix& m);

/// Uniformly spaced sample times on [start, end].
struct TimeGrid {
  double start = 0.0;
  double end = 1.0;
  int count = 2;

  TimeGrid() = default;
  TimeGrid(double start, double end, int count);

  std::vector<double> points() const;
  double spacing() const { return (end - start) / (count - 1); }
  std::string to_string() const;

  // "a:b:n"
  static TimeGrid parse(const std::string& spec);
};

}  // namespace ltv
