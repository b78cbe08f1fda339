#include "ltvobs/lp.hpp"

#include <cmath>
#include <limits>

#include "ltvobs/error.hpp"

namespace ltv {

CoveringLpResult solve_covering_lp(const Eigen::MatrixXd& G, const Eigen::VectorXd& rhs,
                                   const Eigen::VectorXd& cost) {
  const Eigen::Index n_rows = G.rows();  // primal constraints = dual variables
  const Eigen::Index k = G.cols();       // primal variables = dual constraints
  if (rhs.size() != n_rows || cost.size() != k) throw InfeasibleFit("covering LP: shape mismatch");
  if ((cost.array() < 0.0).any()) throw InfeasibleFit("covering LP: cost must be non-negative");
  if (!G.allFinite() || !rhs.allFinite()) throw InfeasibleFit("covering LP: non-finite data");

  // Tableau for the dual in standard form: k rows, columns = n_rows duals +
  // k slacks + right-hand side. Objective row stores reduced profits.
  const Eigen::Index cols = n_rows + k + 1;
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(k + 1, cols);
  tab.block(0, 0, k, n_rows) = G.transpose();
  tab.block(0, n_rows, k, k).setIdentity();
  tab.col(cols - 1).head(k) = cost;
  tab.row(k).head(n_rows) = -rhs.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) basis[static_cast<std::size_t>(i)] = n_rows + i;

  const double eps = 1e-12;
  CoveringLpResult res;
  const int max_iter = static_cast<int>(50 * (n_rows + k) + 1000);
  for (;;) {
    if (res.iterations++ > max_iter) throw InfeasibleFit("covering LP: iteration limit");
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n_rows + k; ++j) {
      if (tab(k, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
      if (tab(i, enter) > eps) {
        const double ratio = tab(i, cols - 1) / tab(i, enter);
        if (ratio < best - 1e-15 ||
            (std::fabs(ratio - best) <= 1e-15 && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw InfeasibleFit("covering LP: primal infeasible (dual unbounded)");

    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i <= k; ++i) {
      if (i != leave && tab(i, enter) != 0.0) tab.row(i) -= tab(i, enter) * tab.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  res.x = tab.row(k).segment(n_rows, k).transpose();
  res.x = res.x.cwiseMax(0.0);
  res.objective = cost.dot(res.x);
  return res;
}

}  // namespace ltv
