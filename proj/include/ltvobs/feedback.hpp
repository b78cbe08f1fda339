#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltvobs/envelope.hpp"
#include "ltvobs/nucert.hpp"
#include "ltvobs/ode.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

/// A(t) - K(t) C(t), built at the expression level.
TvMatrix close_loop(const TvMatrix& A, const TvMatrix& K, const TvMatrix& C);

/// ||K(z)|| <= script_K e^{delta z} and ||C(z)|| <= script_C e^{-gamma z},
/// with the two hypothesis margins computed from the plant envelope.
struct FeedbackGains {
  double script_K = 0.0;
  double delta = 0.0;
  double script_C = 0.0;
  double gamma = 0.0;
  bool gain_identically_zero = false;
  std::vector<double> fitted_on;  // z samples
  int envelope_violations = 0;
  double ged = 0.0;  // gamma - (eps + delta), must be > 0
  double aed = 0.0;  // -a + eps + delta, must be > 0
};

// Floor for script_K when the gain vanishes on the whole grid.
constexpr double kGainFloor = 1e-12;

/// Fits both envelopes on z. For an identically zero gain script_K is
/// floored and delta is placed mid-way in the interval (a - eps, gamma - eps)
/// when that interval is non-empty, so that the margins do not depend on
/// an arbitrary rate.
FeedbackGains fit_feedback_gains(const TvMatrix& K, const TvMatrix& C, const GrowthEnvelope& plant,
                                 std::span<const double> z);

/// Manual override of the fitted constants.
struct ConstantOverrides {
  std::optional<double> K0, a, eps, script_K, delta, script_C, gamma;
};

void apply_overrides(const ConstantOverrides& o, GrowthEnvelope& env, FeedbackGains& gains);

/// Sample times covering [t_grid.front(), t_grid.back() + sigma_max] with
/// spacing at most `max_spacing`; used for plant and gain envelopes.
std::vector<double> feedback_support(std::span<const double> t_grid, std::span<const double> sigma_grid,
                                     double max_spacing = 0.5);

/// ||Phi_closed(t2, t1)|| <= K0 e^{K0 script_K script_C / ged} e^{a (t2 - t1) + eps t1}
/// checked on every t2 >= t1 pair of t_grid.
struct ClosedGrowthReport {
  double gronwall_factor = 0.0;  // K0 e^{K0 script_K script_C / ged}
  double max_ratio = 0.0;        // observed / bound
  double worst_t2 = 0.0;
  double worst_t1 = 0.0;
  int pairs = 0;
  int violations = 0;
};

/// Throws HypothesisUnmet("conditionGED") when gamma - (eps + delta) <= 0.
ClosedGrowthReport verify_closed_growth(const TvMatrix& A, const TvMatrix& K, const TvMatrix& C,
                                        const FeedbackGains& gains, const GrowthEnvelope& plant,
                                        std::span<const double> t_grid,
                                        const IntegratorConfig& cfg = {});

enum class PhiCase { PhiLess, PhiEqualsOne, PhiGreater };

std::string to_string(PhiCase c);

// |phi - 1| below this counts as phi = 1; both lower bounds are then evaluated.
constexpr double kPhiOneBand = 1e-6;

PhiCase classify_phi(double phi);

/// phi = K0 script_K script_C / (4 aed ged).
double feedback_phi(const GrowthEnvelope& plant, const FeedbackGains& gains);

/// psi(sigma) = theta1(sigma) K0 e^{K0 script_K script_C / ged} script_K script_C / (4 aed ged).
double feedback_psi(double theta1, const GrowthEnvelope& plant, const FeedbackGains& gains);

/// Lower bound on Lambda at (t, sigma) for the given case.
double lambda_lower_bound(PhiCase c, double phi, double theta0, double theta1, double nu0, double nu1,
                          double t);

// 4 (theta1 + psi) e^{2 nu1 t}.
double lambda_upper_bound(double theta1, double psi, double nu1, double t);

struct LambdaSample {
  double t = 0.0;
  double sigma = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double observed_min = 0.0;  // over the probe vectors
  double observed_max = 0.0;
};

struct FeedbackOptions {
  std::uint64_t seed = 20240501;
  int random_vectors = 8;
  // When false, failing conditions are recorded instead of thrown and the
  // bound containment is skipped.
  bool require_hypotheses = true;
  ConstantOverrides overrides;
  double pd_tol = kDefaultPdTol;
};

/// Closed-loop Lambda estimates for the output injection A - K C.
struct FeedbackCheck {
  GrowthEnvelope plant_envelope;
  FeedbackGains gains;
  bool hypotheses_met = false;
  std::vector<std::string> unmet_conditions;
  double phi = 0.0;
  PhiCase phi_case = PhiCase::PhiLess;
  std::vector<double> psi;  // per sigma
  std::vector<LambdaSample> samples;
  std::vector<std::string> violations;
  double max_lower_ratio = 0.0;  // lower / observed_min
  double max_upper_ratio = 0.0;  // observed_max / upper
  CertOutcome plant;
  CertOutcome closed;
  bool verdicts_agree = false;
  ClosedGrowthReport closed_growth;
};

/// Theorem-level check for the closed loop A - K C. Requires (A, C) to be
/// NUCO on the grid (NotObservableOnGrid otherwise) and, unless disabled,
/// conditions GED and AED on the fitted constants (HypothesisUnmet).
FeedbackCheck verify_output_injection(const TvMatrix& A, const TvMatrix& K, const TvMatrix& C,
                                      std::span<const double> t_grid,
                                      std::span<const double> sigma_grid,
                                      const IntegratorConfig& cfg = {},
                                      const FeedbackOptions& opts = {});

/// Output feedback u = -F y with K = B F.
FeedbackCheck verify_preservation(const TvMatrix& A, const TvMatrix& B, const TvMatrix& F,
                                  const TvMatrix& C, std::span<const double> t_grid,
                                  std::span<const double> sigma_grid,
                                  const IntegratorConfig& cfg = {}, const FeedbackOptions& opts = {});

/// Input feedback u = -L x, checked through the dual system.
struct InputFeedbackReport {
  double script_L = 0.0;
  double ell = 0.0;
  double script_B = 0.0;
  double beta = 0.0;
  double bel = 0.0;  // beta - (eps + ell), must be > 0
  GrowthEnvelope plant_envelope;
  std::optional<FeedbackCheck> dual_path;  // empty when the dual plant is not NUCO
  CertOutcome dual_closed;                 // NUCO of (-A^T + L^T B^T, B^T)
  CertOutcome direct;                      // NUCC of (A - B L, B)
  double dual_back_mismatch = 0.0;         // max |dualized-back loop - (A - B L)| at samples
  bool paths_agree = false;
};

/// Throws HypothesisUnmet("conditionBEL") when beta - (eps + ell) <= 0.
InputFeedbackReport verify_input_feedback(const TvMatrix& A, const TvMatrix& B, const TvMatrix& L,
                                          std::span<const double> t_grid,
                                          std::span<const double> sigma_grid,
                                          const IntegratorConfig& cfg = {},
                                          const FeedbackOptions& opts = {});

}  // namespace ltv
