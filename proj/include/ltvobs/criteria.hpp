#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ltvobs/gramian.hpp"
#include "ltvobs/ode.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

struct RankReport {
  std::optional<double> tested_at;  // empty for the time-invariant test
  int matrix_rows = 0;
  int rank = 0;
  std::vector<double> singular_values;
  bool observable = false;
};

constexpr double kDefaultRankTol = 1e-8;

// Numerical rank: singular values above rank_tol * sv_max.
RankReport numerical_rank(const Eigen::MatrixXd& stacked, int n, double rank_tol = kDefaultRankTol);

/// Kalman rank test on the stack [C; CA; ...; CA^(n-1)].
RankReport lti_obs_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                        double rank_tol = kDefaultRankTol);

/// Rank of [L_0; ...; L_q] at t_a with L_0 = C and L_i = L_{i-1} A + dL_{i-1}/dt.
/// Derivatives are central differences with one Richardson level. A full
/// rank is sufficient for observability on any interval containing t_a; a
/// rank deficit proves nothing.
RankReport ltv_L_rank(const TvMatrix& A, const TvMatrix& C, int q, double t_a,
                      double fd_step = 1e-5, double rank_tol = kDefaultRankTol);

// The stacked L matrix itself; exposed for tests.
Eigen::MatrixXd ltv_L_stack(const TvMatrix& A, const TvMatrix& C, int q, double t_a, double fd_step);

struct ObservabilityWitness {
  bool observable = false;
  GramianResult gramian;
};

/// Observable at t0 on [t0, tf] iff lambda_min(M(t0,tf)) > pd_tol * (1 + lambda_max).
ObservabilityWitness observable_at(const TvMatrix& A, const TvMatrix& C, double t0, double tf,
                                   const IntegratorConfig& cfg = {}, double pd_tol = 1e-10);

}  // namespace ltv
