#include "ltvobs/criteria.hpp"

#include <cmath>
#include <functional>

#include <Eigen/SVD>

#include "ltvobs/error.hpp"

namespace ltv {

namespace {

using MatrixFn = std::function<Eigen::MatrixXd(double)>;

Eigen::MatrixXd central_difference(const MatrixFn& f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

// One Richardson level on the central difference: (4 D(h/2) - D(h)) / 3.
Eigen::MatrixXd derivative(const MatrixFn& f, double t, double h) {
  const Eigen::MatrixXd coarse = central_difference(f, t, h);
  const Eigen::MatrixXd fine = central_difference(f, t, 0.5 * h);
  Eigen::MatrixXd d = (4.0 * fine - coarse) / 3.0;
  if (!d.allFinite()) throw NonFiniteDerivative("non-finite derivative at t=" + std::to_string(t));
  return d;
}

}  // namespace

RankReport numerical_rank(const Eigen::MatrixXd& stacked, int n, double rank_tol) {
  RankReport rep;
  rep.matrix_rows = static_cast<int>(stacked.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const Eigen::VectorXd sv = svd.singularValues();
  rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double sv_max = sv.size() > 0 ? sv(0) : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv_max > 0.0 && sv(i) > rank_tol * sv_max) ++rep.rank;
  }
  rep.observable = rep.rank == n;
  return rep;
}

RankReport lti_obs_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double rank_tol) {
  if (A.rows() != A.cols() || A.rows() == 0) throw DimensionMismatch("A must be square");
  if (C.cols() != A.rows() || C.rows() == 0) throw DimensionMismatch("C must have n columns");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = C.rows();
  Eigen::MatrixXd stacked(n * m, n);
  Eigen::MatrixXd block = C;
  for (Eigen::Index i = 0; i < n; ++i) {
    stacked.middleRows(i * m, m) = block;
    block = block * A;
  }
  return numerical_rank(stacked, static_cast<int>(n), rank_tol);
}

Eigen::MatrixXd ltv_L_stack(const TvMatrix& A, const TvMatrix& C, int q, double t_a, double fd_step) {
  if (A.empty() || !A.is_square()) throw DimensionMismatch("A must be square");
  if (C.empty() || C.cols() != A.rows()) throw DimensionMismatch("C must have n columns");
  if (q < 0) throw ConfigError("q must be non-negative");
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be positive");

  // L_i as a function of time, built recursively; each level differentiates
  // the previous one numerically.
  std::vector<MatrixFn> levels;
  levels.push_back([&C](double t) { return C.eval(t); });
  for (int i = 1; i <= q; ++i) {
    const MatrixFn prev = levels.back();
    levels.push_back([prev, &A, fd_step](double t) -> Eigen::MatrixXd {
      return prev(t) * A.eval(t) + derivative(prev, t, fd_step);
    });
  }

  const Eigen::Index m = C.rows();
  Eigen::MatrixXd stacked((q + 1) * m, A.rows());
  for (int i = 0; i <= q; ++i) stacked.middleRows(i * m, m) = levels[static_cast<std::size_t>(i)](t_a);
  return stacked;
}

RankReport ltv_L_rank(const TvMatrix& A, const TvMatrix& C, int q, double t_a, double fd_step,
                      double rank_tol) {
  RankReport rep = numerical_rank(ltv_L_stack(A, C, q, t_a, fd_step), A.rows(), rank_tol);
  rep.tested_at = t_a;
  return rep;
}

ObservabilityWitness observable_at(const TvMatrix& A, const TvMatrix& C, double t0, double tf,
                                   const IntegratorConfig& cfg, double pd_tol) {
  if (!(tf > t0)) throw ConfigError("observable_at requires tf > t0");
  ObservabilityWitness w;
  w.gramian = obs_gramian(A, C, t0, tf - t0, cfg);
  w.observable = w.gramian.lambda_min > pd_tol * (1.0 + w.gramian.lambda_max);
  return w;
}

}  // namespace ltv
