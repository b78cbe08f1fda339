#pragma once

#include <span>
#include <string>

#include "ltvobs/envelope.hpp"
#include "ltvobs/nucert.hpp"
#include "ltvobs/ode.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

/// The adjoint control system  x' = -A^T(t) x + C^T(t) u.
struct DualSystem {
  TvMatrix A_dual;  // n x n, entrywise negation of A^T
  TvMatrix B_dual;  // n x m, C^T
};

/// Structural transpose-and-negate; negations are always wrapped, so
/// dualizing twice gives -(-a) entries that evaluate to the original ones.
DualSystem dualize(const TvMatrix& A, const TvMatrix& C);

/// Max over the grid of ||M_(A,C) - W_(-A^T,C^T)||_inf / (1 + ||M||_inf).
struct GramianIdentityReport {
  double max_deviation = 0.0;
  double worst_t = 0.0;
  double worst_sigma = 0.0;
  int points = 0;
  double tolerance = 1e-6;
  bool passed = false;
};

GramianIdentityReport check_gramian_identity(const TvMatrix& A, const TvMatrix& C,
                                             std::span<const double> t_grid,
                                             std::span<const double> sigma_grid,
                                             const IntegratorConfig& cfg = {});

/// NUCO of (A, C) against NUCC of the dual on the same grids, with the
/// dual plant's growth bound K0 e^{(a+eps)|t-tau| + eps tau} checked on
/// t_grid x t_grid.
struct DualityReport {
  GrowthEnvelope envelope;  // of A
  CertOutcome primal;
  CertOutcome dual;
  bool verdicts_agree = false;
  // Rate pairs (nu0, mu0) and (nu1, mu1); filled only when both certify.
  double nu0 = 0.0, nu1 = 0.0, mu0 = 0.0, mu1 = 0.0;
  double max_rate_gap = 0.0;
  double rate_slack = 0.05;
  bool rates_match = true;
  // Dual growth bound on the sampled pairs.
  int dual_bound_violations = 0;
  double max_dual_bound_ratio = 0.0;
  int dual_bound_pairs = 0;
};

/// Throws HypothesisUnmet("growthEnvelope") when no growth envelope can be
/// fitted to A on t_grid x t_grid.
DualityReport check_duality_theorem(const TvMatrix& A, const TvMatrix& C,
                                    std::span<const double> t_grid,
                                    std::span<const double> sigma_grid,
                                    const IntegratorConfig& cfg = {},
                                    double pd_tol = kDefaultPdTol);

}  // namespace ltv
