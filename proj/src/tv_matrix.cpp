#include "ltvobs/tv_matrix.hpp"

#include <charconv>
#include <cmath>

#include "ltvobs/error.hpp"

namespace ltv {

namespace {

ScalarExpr strip_negations(const ScalarExpr& e) {
  switch (e.kind()) {
    case ExprKind::Number:
    case ExprKind::Time:
      return e;
    case ExprKind::Neg: {
      const ScalarExpr inner = e.lhs();
      if (inner.kind() == ExprKind::Neg) return strip_negations(inner.lhs());
      return ScalarExpr::negate(strip_negations(inner));
    }
    case ExprKind::Call:
      return ScalarExpr::call(e.func(), strip_negations(e.lhs()));
    default:
      return ScalarExpr::binary(e.kind(), strip_negations(e.lhs()), strip_negations(e.rhs()));
  }
}

}  // namespace

TvMatrix::TvMatrix(int rows, int cols, std::vector<ScalarExpr> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows <= 0 || cols <= 0) throw DimensionMismatch("matrix dimensions must be positive");
  if (entries_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionMismatch("entry count " + std::to_string(entries_.size()) + " != " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
}

TvMatrix TvMatrix::parse(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty() || rows.front().empty()) throw DimensionMismatch("empty matrix");
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.front().size());
  std::vector<ScalarExpr> entries;
  entries.reserve(static_cast<std::size_t>(r * c));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) throw DimensionMismatch("ragged matrix rows");
    for (const auto& src : row) entries.push_back(parse_expr(src));
  }
  return TvMatrix(r, c, std::move(entries));
}

TvMatrix TvMatrix::constant(const Eigen::MatrixXd& m) {
  std::vector<ScalarExpr> entries;
  entries.reserve(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) entries.push_back(ScalarExpr::number(m(i, j)));
  }
  return TvMatrix(static_cast<int>(m.rows()), static_cast<int>(m.cols()), std::move(entries));
}

TvMatrix TvMatrix::zero(int rows, int cols) {
  return TvMatrix(rows, cols,
                  std::vector<ScalarExpr>(static_cast<std::size_t>(rows * cols), ScalarExpr()));
}

bool TvMatrix::is_constant() const {
  for (const auto& e : entries_) {
    if (!e.is_constant()) return false;
  }
  return true;
}

Eigen::MatrixXd TvMatrix::eval(double t) const {
  Eigen::MatrixXd out(rows_, cols_);
  eval_into(t, out);
  return out;
}

void TvMatrix::eval_into(double t, Eigen::MatrixXd& out) const {
  out.resize(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      const std::size_t k = static_cast<std::size_t>(i * cols_ + j);
      try {
        out(i, j) = entries_[k].eval(t);
      } catch (const EvalError& e) {
        throw EvalError(e.cause() + " (t=" + std::to_string(t) + ")", k);
      }
    }
  }
}

std::vector<std::vector<std::string>> TvMatrix::to_strings() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(rows_));
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[static_cast<std::size_t>(i)].push_back(at(i, j).to_string());
  }
  return out;
}

TvMatrix transpose(const TvMatrix& m) {
  std::vector<ScalarExpr> entries;
  entries.reserve(m.entries().size());
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) entries.push_back(m.at(i, j));
  }
  return TvMatrix(m.cols(), m.rows(), std::move(entries));
}

TvMatrix negate(const TvMatrix& m) {
  std::vector<ScalarExpr> entries;
  entries.reserve(m.entries().size());
  for (const auto& e : m.entries()) entries.push_back(ScalarExpr::negate(e));
  return TvMatrix(m.rows(), m.cols(), std::move(entries));
}

TvMatrix multiply(const TvMatrix& lhs, const TvMatrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    throw DimensionMismatch("product of " + std::to_string(lhs.rows()) + "x" +
                            std::to_string(lhs.cols()) + " and " + std::to_string(rhs.rows()) +
                            "x" + std::to_string(rhs.cols()));
  }
  std::vector<ScalarExpr> entries;
  entries.reserve(static_cast<std::size_t>(lhs.rows() * rhs.cols()));
  for (int i = 0; i < lhs.rows(); ++i) {
    for (int j = 0; j < rhs.cols(); ++j) {
      ScalarExpr sum = ScalarExpr::binary(ExprKind::Mul, lhs.at(i, 0), rhs.at(0, j));
      for (int k = 1; k < lhs.cols(); ++k) {
        sum = ScalarExpr::binary(ExprKind::Add, sum,
                                 ScalarExpr::binary(ExprKind::Mul, lhs.at(i, k), rhs.at(k, j)));
      }
      entries.push_back(sum);
    }
  }
  return TvMatrix(lhs.rows(), rhs.cols(), std::move(entries));
}

TvMatrix subtract(const TvMatrix& lhs, const TvMatrix& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
    throw DimensionMismatch("difference of differently shaped matrices");
  }
  std::vector<ScalarExpr> entries;
  entries.reserve(lhs.entries().size());
  for (std::size_t k = 0; k < lhs.entries().size(); ++k) {
    entries.push_back(ScalarExpr::binary(ExprKind::Sub, lhs.entries()[k], rhs.entries()[k]));
  }
  return TvMatrix(lhs.rows(), lhs.cols(), std::move(entries));
}

TvMatrix strip_double_negation(const TvMatrix& m) {
  std::vector<ScalarExpr> entries;
  entries.reserve(m.entries().size());
  for (const auto& e : m.entries()) entries.push_back(strip_negations(e));
  return TvMatrix(m.rows(), m.cols(), std::move(entries));
}

TimeGrid::TimeGrid(double start_, double end_, int count_) : start(start_), end(end_), count(count_) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(start < end)) {
    throw DegenerateGrid("grid requires finite start < end");
  }
  if (count < 2) throw DegenerateGrid("grid requires at least 2 points");
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> pts(static_cast<std::size_t>(count));
  const double h = spacing();
  for (int i = 0; i < count; ++i) pts[static_cast<std::size_t>(i)] = start + h * i;
  pts.back() = end;
  return pts;
}

std::string TimeGrid::to_string() const {
  auto fmt = [](double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  };
  return fmt(start) + ":" + fmt(end) + ":" + std::to_string(count);
}

TimeGrid TimeGrid::parse(const std::string& spec) {
  const auto p1 = spec.find(':');
  const auto p2 = p1 == std::string::npos ? std::string::npos : spec.find(':', p1 + 1);
  if (p2 == std::string::npos) throw ConfigError("grid must be 'start:end:count', got '" + spec + "'");
  auto parse_double = [&](std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError("bad number '" + std::string(s) + "' in grid '" + spec + "'");
    }
    return v;
  };
  const std::string_view sv(spec);
  const double a = parse_double(sv.substr(0, p1));
  const double b = parse_double(sv.substr(p1 + 1, p2 - p1 - 1));
  int n = 0;
  const auto tail = sv.substr(p2 + 1);
  auto res = std::from_chars(tail.data(), tail.data() + tail.size(), n);
  if (res.ec != std::errc() || res.ptr != tail.data() + tail.size()) {
    throw ConfigError("bad count in grid '" + spec + "'");
  }
  return TimeGrid(a, b, n);
}

}  // namespace ltv
