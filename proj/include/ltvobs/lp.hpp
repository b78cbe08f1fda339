#pragma once

#include <Eigen/Core>

namespace ltv {

struct CoveringLpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// Solves   min cost^T x   s.t.   G x >= rhs,  x >= 0
/// for a non-negative cost vector. The dual (max rhs^T u, G^T u <= cost,
/// u >= 0) starts feasible at u = 0, so a single simplex phase suffices;
/// x is read off the dual's shadow prices. Bland's rule prevents cycling.
/// Throws InfeasibleFit if the dual is unbounded (primal infeasible).
CoveringLpResult solve_covering_lp(const Eigen::MatrixXd& G, const Eigen::VectorXd& rhs,
                                   const Eigen::VectorXd& cost);

}  // namespace ltv
