#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ltvobs/envelope.hpp"
#include "ltvobs/gramian.hpp"
#include "ltvobs/ode.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

enum class Verdict { CertifiedOnGrid, FailedLower, FailedUpper, Degenerate };

std::string to_string(Verdict v);

// Positive-definiteness test used for sigma0: lambda_min > pd_tol (1 + lambda_max).
constexpr double kDefaultPdTol = 1e-10;
// Slack on every certified inequality: 1e-8 (1 + |bound|).
constexpr double kCertSlack = 1e-8;
// Rates at or below this count as zero for the uniform (UCO) flag.
constexpr double kUniformRateTol = 1e-3;

/// Gramians of one kind over a (t, sigma) grid. Row i is t_grid[i],
/// column j is sigma_grid[j].
struct GramianTable {
  std::vector<double> t_grid;
  std::vector<double> sigma_grid;
  Eigen::MatrixXd lambda_min;
  Eigen::MatrixXd lambda_max;
  std::vector<GramianResult> entries;  // row-major (t, sigma)

  const GramianResult& at(std::size_t i, std::size_t j) const {
    return entries[i * sigma_grid.size() + j];
  }
};

GramianTable obs_table(const TvMatrix& A, const TvMatrix& C, std::span<const double> t_grid,
                       std::span<const double> sigma_grid, const IntegratorConfig& cfg = {});

struct ControllabilityTables {
  GramianTable W;
  GramianTable K;
};

ControllabilityTables ctrl_tables(const TvMatrix& A, const TvMatrix& B,
                                  std::span<const double> t_grid,
                                  std::span<const double> sigma_grid,
                                  const IntegratorConfig& cfg = {});

/// Index of the smallest sigma with a positive-definite Gramian at row i, or
/// -1 if there is none. Doubling search from the smallest sigma, then
/// bisection; relies on monotonicity of the Gramian in sigma.
int first_pd_index(const GramianTable& table, std::size_t row, double pd_tol = kDefaultPdTol);

/// One-sided exponential fit of a table against  level(sigma) e^{-2 rate t}.
///
/// `log_values(i, j)` enters only where j >= first_col[i] (first_col[i] < 0
/// drops the row). The rate minimizes the summed log-gap between the values
/// and the tightest admissible levels; ties go to the smaller rate. Levels
/// are the tightest ones for that rate, i.e.
/// level_j = exp(min_i (log_values(i,j) + 2 rate t_i)).
struct RateFit {
  double rate = 0.0;
  std::vector<double> log_level;  // +inf for a column with no entries
  double objective = 0.0;
};

RateFit fit_lower_rate(const Eigen::MatrixXd& log_values, std::span<const double> t_grid,
                       std::span<const int> first_col);

struct BoundResiduals {
  int lower_violations = 0;
  int upper_violations = 0;
  // Largest log(lambda_min / lower bound) and log(upper bound / lambda_max)
  // over the certified entries: how loose the fitted bounds are.
  double max_lower_log_gap = 0.0;
  double max_upper_log_gap = 0.0;
};

/// Two-sided bound  lower(sigma) e^{-2 r0 t} <= Gramian <= upper(sigma) e^{2 r1 t}
/// fitted on one table for sigma >= sigma0(t).
struct TwoSidedFit {
  double rate_lower = 0.0;
  double rate_upper = 0.0;
  std::vector<double> lower;  // non-decreasing in sigma
  std::vector<double> upper;  // non-decreasing in sigma
  BoundResiduals residuals;
  Verdict verdict = Verdict::Degenerate;
};

TwoSidedFit fit_two_sided(const GramianTable& table, std::span<const int> first_col);

// Counts violations of a two-sided fit against a table (same grids).
BoundResiduals check_two_sided(const TwoSidedFit& fit, const GramianTable& table,
                               std::span<const int> first_col);

/// Empirical NUCO certificate: on the grid,
///   theta0(sigma) e^{-2 nu0 t} <= M(t, t+sigma) <= theta1(sigma) e^{2 nu1 t}
/// for every sigma >= sigma0(t).
struct NucoCertificate {
  double nu0 = 0.0;
  double nu1 = 0.0;
  std::vector<double> theta0;
  std::vector<double> theta1;
  std::vector<double> sigma0;  // per t
  std::vector<double> t_grid;
  std::vector<double> sigma_grid;
  BoundResiduals residuals;
  Verdict verdict = Verdict::Degenerate;
  bool uniform = false;  // UCO: both rates ~0 and sigma0 constant
  GramianTable table;
};

/// Throws NotObservableOnGrid if M is not positive definite for any grid
/// sigma at some grid t.
NucoCertificate certify_nuco(const TvMatrix& A, const TvMatrix& C, std::span<const double> t_grid,
                             std::span<const double> sigma_grid, const IntegratorConfig& cfg = {},
                             double pd_tol = kDefaultPdTol);

NucoCertificate certify_nuco_from_table(GramianTable table, double pd_tol = kDefaultPdTol);

/// Recomputes every certified Gramian from scratch (one solve per (t, sigma))
/// and counts violations of the certificate's bounds.
int reverify_nuco(const NucoCertificate& cert, const TvMatrix& A, const TvMatrix& C,
                  const IntegratorConfig& cfg = {});

/// Empirical NUCC certificate: the four bounds on W and K for sigma >= sigma0(t).
struct NuccCertificate {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu0_tilde = 0.0;
  double mu1_tilde = 0.0;
  std::vector<double> alpha0;
  std::vector<double> alpha1;
  std::vector<double> beta0;
  std::vector<double> beta1;
  std::vector<double> sigma0;
  std::vector<double> t_grid;
  std::vector<double> sigma_grid;
  BoundResiduals w_residuals;
  BoundResiduals k_residuals;
  Verdict verdict = Verdict::Degenerate;
  bool uniform = false;
  ControllabilityTables tables;
};

/// Throws NotControllableOnGrid if W or K is not positive definite for any
/// grid sigma at some grid t.
NuccCertificate certify_nucc(const TvMatrix& A, const TvMatrix& B, std::span<const double> t_grid,
                             std::span<const double> sigma_grid, const IntegratorConfig& cfg = {},
                             double pd_tol = kDefaultPdTol);

int reverify_nucc(const NuccCertificate& cert, const TvMatrix& A, const TvMatrix& B,
                  const IntegratorConfig& cfg = {});

/// Certification status that does not throw: `status` is the verdict name,
/// or the error code when the Gramians are not positive definite on the grid.
struct CertOutcome {
  bool certified = false;
  std::string status;
};

CertOutcome nuco_outcome(const TvMatrix& A, const TvMatrix& C, std::span<const double> t_grid,
                         std::span<const double> sigma_grid, const IntegratorConfig& cfg = {},
                         double pd_tol = kDefaultPdTol);
CertOutcome nucc_outcome(const TvMatrix& A, const TvMatrix& B, std::span<const double> t_grid,
                         std::span<const double> sigma_grid, const IntegratorConfig& cfg = {},
                         double pd_tol = kDefaultPdTol);

/// Grid check of "any two of {W-bounds, K-bounds, Kalman property} imply
/// the third". On a grid the W (K) bounds hold iff W (K) is positive
/// definite at some grid sigma for every grid t; the Kalman property holds
/// iff a growth envelope fitted on t_grid x t_grid covers every sample.
struct Implication {
  std::string premise_a;
  std::string premise_b;
  std::string conclusion;
  bool holds = false;
};

struct TwoImplyThirdReport {
  bool w_bounds = false;
  bool k_bounds = false;
  bool kalman = false;
  int properties_holding = 0;
  std::vector<Implication> tested;
  std::vector<std::string> findings;  // failed implications
  std::string note;
};

TwoImplyThirdReport check_two_imply_third(const TvMatrix& A, const TvMatrix& B,
                                          std::span<const double> t_grid,
                                          std::span<const double> sigma_grid,
                                          const IntegratorConfig& cfg = {},
                                          double pd_tol = kDefaultPdTol);

}  // namespace ltv
