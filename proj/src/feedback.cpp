#include "ltvobs/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "ltvobs/dual.hpp"
#include "ltvobs/error.hpp"
#include "ltvobs/flow.hpp"
#include "ltvobs/gramian.hpp"
#include "ltvobs/linalg.hpp"
#include "ltvobs/parallel.hpp"

namespace ltv {

namespace {

double slack(double bound) { return kCertSlack * (1.0 + std::fabs(bound)); }

std::vector<double> norms_on(const TvMatrix& m, std::span<const double> z) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = spectral_norm(m.eval(z[i]));
  return out;
}

// Canonical basis followed by seeded random unit vectors.
std::vector<Eigen::VectorXd> probe_vectors(int n, int random_count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) out.push_back(Eigen::VectorXd::Unit(n, i));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < random_count; ++k) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    if (v.norm() == 0.0) v(0) = 1.0;
    out.push_back(v.normalized());
  }
  return out;
}

}  // namespace

TvMatrix close_loop(const TvMatrix& A, const TvMatrix& K, const TvMatrix& C) {
  if (A.empty() || !A.is_square()) throw DimensionMismatch("close_loop: A must be square");
  if (K.rows() != A.rows() || C.cols() != A.cols() || K.cols() != C.rows()) {
    throw DimensionMismatch("close_loop: K must be n x m and C m x n");
  }
  return subtract(A, multiply(K, C));
}

std::vector<double> feedback_support(std::span<const double> t_grid, std::span<const double> sigma_grid,
                                     double max_spacing) {
  if (t_grid.empty() || sigma_grid.empty()) throw DegenerateGrid("empty feedback grid");
  const double lo = *std::min_element(t_grid.begin(), t_grid.end());
  const double hi = *std::max_element(t_grid.begin(), t_grid.end()) +
                    *std::max_element(sigma_grid.begin(), sigma_grid.end());
  const int count = std::max(2, static_cast<int>(std::ceil((hi - lo) / max_spacing - 1e-9)) + 1);
  return TimeGrid(lo, hi, count).points();
}

FeedbackGains fit_feedback_gains(const TvMatrix& K, const TvMatrix& C, const GrowthEnvelope& plant,
                                 std::span<const double> z) {
  const std::vector<double> k_norms = norms_on(K, z);
  const std::vector<double> c_norms = norms_on(C, z);
  const ExpEnvelope k_env = fit_exp_envelope(z, k_norms, kGainFloor);
  const ExpEnvelope c_env = fit_exp_envelope(z, c_norms, kGainFloor);

  FeedbackGains g;
  g.fitted_on.assign(z.begin(), z.end());
  g.script_C = c_env.scale;
  g.gamma = -c_env.rate;
  g.script_K = k_env.scale;
  g.delta = k_env.rate;
  g.gain_identically_zero = k_env.identically_zero;
  if (g.gain_identically_zero) {
    const double lo = plant.a - plant.eps;
    const double hi = g.gamma - plant.eps;
    if (lo < hi) g.delta = 0.5 * (lo + hi);
  }
  g.envelope_violations = k_env.violations + c_env.violations;
  g.ged = g.gamma - (plant.eps + g.delta);
  g.aed = -plant.a + plant.eps + g.delta;
  return g;
}

void apply_overrides(const ConstantOverrides& o, GrowthEnvelope& env, FeedbackGains& gains) {
  if (o.K0) env.K0 = *o.K0;
  if (o.a) env.a = *o.a;
  if (o.eps) env.eps = *o.eps;
  if (o.script_K) gains.script_K = *o.script_K;
  if (o.delta) gains.delta = *o.delta;
  if (o.script_C) gains.script_C = *o.script_C;
  if (o.gamma) gains.gamma = *o.gamma;
  gains.ged = gains.gamma - (env.eps + gains.delta);
  gains.aed = -env.a + env.eps + gains.delta;
}

ClosedGrowthReport verify_closed_growth(const TvMatrix& A, const TvMatrix& K, const TvMatrix& C,
                                        const FeedbackGains& gains, const GrowthEnvelope& plant,
                                        std::span<const double> t_grid,
                                        const IntegratorConfig& cfg) {
  if (!(gains.ged > 0.0)) {
    throw HypothesisUnmet("conditionGED", "gamma - (eps + delta) = " + std::to_string(gains.ged) +
                                              " is not positive");
  }
  const TvMatrix closed = close_loop(A, K, C);
  ClosedGrowthReport rep;
  rep.gronwall_factor =
      plant.K0 * std::exp(plant.K0 * gains.script_K * gains.script_C / gains.ged);

  struct Row {
    double ratio = 0.0;
    double t2 = 0.0;
    int pairs = 0;
    int violations = 0;
  };
  std::vector<Row> rows(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t k) {
    const double t1 = t_grid[k];
    const auto phis = transition_from(closed, t1, t_grid, cfg);
    Row& row = rows[k];
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double t2 = t_grid[i];
      if (t2 < t1) continue;
      const double bound = rep.gronwall_factor * std::exp(plant.a * (t2 - t1) + plant.eps * t1);
      const double norm = spectral_norm(phis[i]);
      ++row.pairs;
      if (norm > bound + slack(bound)) ++row.violations;
      if (norm / bound > row.ratio) row.ratio = norm / bound, row.t2 = t2;
    }
  });
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rep.pairs += rows[k].pairs;
    rep.violations += rows[k].violations;
    if (rows[k].ratio > rep.max_ratio) {
      rep.max_ratio = rows[k].ratio;
      rep.worst_t2 = rows[k].t2;
      rep.worst_t1 = t_grid[k];
    }
  }
  return rep;
}

std::string to_string(PhiCase c) {
  switch (c) {
    case PhiCase::PhiLess:
      return "PhiLess";
    case PhiCase::PhiEqualsOne:
      return "PhiEqualsOne";
    case PhiCase::PhiGreater:
      return "PhiGreater";
  }
  return "unknown";
}

PhiCase classify_phi(double phi) {
  if (std::fabs(phi - 1.0) < kPhiOneBand) return PhiCase::PhiEqualsOne;
  return phi > 1.0 ? PhiCase::PhiGreater : PhiCase::PhiLess;
}

double feedback_phi(const GrowthEnvelope& plant, const FeedbackGains& gains) {
  return plant.K0 * gains.script_K * gains.script_C / (4.0 * gains.aed * gains.ged);
}

double feedback_psi(double theta1, const GrowthEnvelope& plant, const FeedbackGains& gains) {
  const double kc = gains.script_K * gains.script_C;
  return theta1 * plant.K0 * std::exp(plant.K0 * kc / gains.ged) * kc /
         (4.0 * gains.aed * gains.ged);
}

double lambda_lower_bound(PhiCase c, double phi, double theta0, double theta1, double nu0, double nu1,
                          double t) {
  const double num = theta0 * theta0 * std::exp(-(4.0 * nu0 + 2.0 * nu1) * t);
  const double small_phi = num / (4.0 * theta1);
  const double large_phi = num / (4.0 * std::max(theta1, (phi - 1.0) * theta0));
  switch (c) {
    case PhiCase::PhiLess:
      return small_phi;
    case PhiCase::PhiGreater:
      return large_phi;
    case PhiCase::PhiEqualsOne:
      return std::max(small_phi, large_phi);
  }
  return small_phi;
}

double lambda_upper_bound(double theta1, double psi, double nu1, double t) {
  return 4.0 * (theta1 + psi) * std::exp(2.0 * nu1 * t);
}

FeedbackCheck verify_output_injection(const TvMatrix& A, const TvMatrix& K, const TvMatrix& C,
                                      std::span<const double> t_grid,
                                      std::span<const double> sigma_grid,
                                      const IntegratorConfig& cfg, const FeedbackOptions& opts) {
  const TvMatrix closed = close_loop(A, K, C);
  const std::vector<double> z = feedback_support(t_grid, sigma_grid);

  const NucoCertificate plant = certify_nuco(A, C, t_grid, sigma_grid, cfg, opts.pd_tol);

  FeedbackCheck out;
  out.plant_envelope = fit_growth_envelope(A, z, z, cfg);
  out.gains = fit_feedback_gains(K, C, out.plant_envelope, z);
  apply_overrides(opts.overrides, out.plant_envelope, out.gains);
  const GrowthEnvelope& env = out.plant_envelope;
  const FeedbackGains& g = out.gains;

  if (!(g.ged > 0.0)) out.unmet_conditions.push_back("conditionGED");
  if (!(g.aed > 0.0)) out.unmet_conditions.push_back("conditionAED");
  out.hypotheses_met = out.unmet_conditions.empty();
  if (!out.hypotheses_met && opts.require_hypotheses) {
    const std::string& which = out.unmet_conditions.front();
    throw HypothesisUnmet(which, which == "conditionGED"
                                     ? "gamma - (eps + delta) = " + std::to_string(g.ged) +
                                           " is not positive"
                                     : "-a + eps + delta = " + std::to_string(g.aed) +
                                           " is not positive");
  }

  out.plant = {plant.verdict == Verdict::CertifiedOnGrid, to_string(plant.verdict)};
  out.closed = nuco_outcome(closed, C, t_grid, sigma_grid, cfg, opts.pd_tol);
  out.verdicts_agree = out.plant.certified == out.closed.certified;

  if (!out.hypotheses_met) return out;

  out.closed_growth = verify_closed_growth(A, K, C, g, env, t_grid, cfg);
  out.phi = feedback_phi(env, g);
  out.phi_case = classify_phi(out.phi);
  out.psi.resize(sigma_grid.size());
  for (std::size_t j = 0; j < sigma_grid.size(); ++j) {
    out.psi[j] = feedback_psi(plant.theta1[j], env, g);
  }

  const std::vector<Eigen::VectorXd> probes = probe_vectors(A.rows(), opts.random_vectors, opts.seed);
  std::vector<std::vector<LambdaSample>> rows(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const double t = t_grid[i];
    const auto series = obs_gramian_series(closed, C, t, sigma_grid, cfg);
    for (std::size_t j = 0; j < sigma_grid.size(); ++j) {
      if (sigma_grid[j] < plant.sigma0[i]) continue;
      LambdaSample s;
      s.t = t;
      s.sigma = sigma_grid[j];
      s.lower = lambda_lower_bound(out.phi_case, out.phi, plant.theta0[j], plant.theta1[j], plant.nu0,
                                   plant.nu1, t);
      s.upper = lambda_upper_bound(plant.theta1[j], out.psi[j], plant.nu1, t);
      s.observed_min = std::numeric_limits<double>::infinity();
      s.observed_max = -std::numeric_limits<double>::infinity();
      for (const auto& v : probes) {
        const double q = v.dot(series[j].matrix * v);
        s.observed_min = std::min(s.observed_min, q);
        s.observed_max = std::max(s.observed_max, q);
      }
      rows[i].push_back(s);
    }
  });

  for (const auto& row : rows) {
    for (const LambdaSample& s : row) {
      out.samples.push_back(s);
      const double tol = slack(s.upper);
      const std::string at = "t=" + std::to_string(s.t) + " sigma=" + std::to_string(s.sigma);
      if (s.observed_min < s.lower - tol) out.violations.push_back("lower bound exceeds Lambda at " + at);
      if (s.observed_max > s.upper + tol) out.violations.push_back("Lambda exceeds upper bound at " + at);
      if (s.observed_min > 0.0) out.max_lower_ratio = std::max(out.max_lower_ratio, s.lower / s.observed_min);
      out.max_upper_ratio = std::max(out.max_upper_ratio, s.observed_max / s.upper);
    }
  }
  if (out.closed_growth.violations > 0) {
    out.violations.push_back("closed-loop growth bound violated on " +
                             std::to_string(out.closed_growth.violations) + " pairs");
  }
  if (!out.closed.certified) out.violations.push_back("closed loop not certified: " + out.closed.status);
  return out;
}

FeedbackCheck verify_preservation(const TvMatrix& A, const TvMatrix& B, const TvMatrix& F,
                                  const TvMatrix& C, std::span<const double> t_grid,
                                  std::span<const double> sigma_grid, const IntegratorConfig& cfg,
                                  const FeedbackOptions& opts) {
  if (B.rows() != A.rows() || F.rows() != B.cols() || F.cols() != C.rows()) {
    throw DimensionMismatch("verify_preservation: need B n x p, F p x m, C m x n");
  }
  return verify_output_injection(A, multiply(B, F), C, t_grid, sigma_grid, cfg, opts);
}

InputFeedbackReport verify_input_feedback(const TvMatrix& A, const TvMatrix& B, const TvMatrix& L,
                                          std::span<const double> t_grid,
                                          std::span<const double> sigma_grid,
                                          const IntegratorConfig& cfg, const FeedbackOptions& opts) {
  if (A.empty() || !A.is_square() || B.rows() != A.rows() || L.rows() != B.cols() ||
      L.cols() != A.cols()) {
    throw DimensionMismatch("verify_input_feedback: need A n x n, B n x p, L p x n");
  }
  const std::vector<double> z = feedback_support(t_grid, sigma_grid);
  InputFeedbackReport rep;
  rep.plant_envelope = fit_growth_envelope(A, z, z, cfg);
  const TvMatrix Lt = transpose(L);
  const TvMatrix Bt = transpose(B);
  const ExpEnvelope l_env = fit_exp_envelope(z, norms_on(Lt, z), kGainFloor);
  const ExpEnvelope b_env = fit_exp_envelope(z, norms_on(Bt, z), kGainFloor);
  rep.script_L = l_env.scale;
  rep.ell = l_env.rate;
  rep.script_B = b_env.scale;
  rep.beta = -b_env.rate;
  rep.bel = rep.beta - (rep.plant_envelope.eps + rep.ell);
  if (!(rep.bel > 0.0)) {
    throw HypothesisUnmet("conditionBEL",
                          "beta - (eps + ell) = " + std::to_string(rep.bel) + " is not positive");
  }

  // Output injection on the dual plant with gain -L^T gives -A^T + L^T B^T,
  // the dual of A - B L.
  const DualSystem dual = dualize(A, Bt);
  const TvMatrix gain = negate(Lt);
  const TvMatrix dual_closed = close_loop(dual.A_dual, gain, Bt);
  try {
    rep.dual_path = verify_output_injection(dual.A_dual, gain, Bt, t_grid, sigma_grid, cfg, opts);
    rep.dual_closed = rep.dual_path->closed;
  } catch (const NotObservableOnGrid&) {
    rep.dual_closed = nuco_outcome(dual_closed, Bt, t_grid, sigma_grid, cfg, opts.pd_tol);
  }

  const TvMatrix direct_closed = subtract(A, multiply(B, L));
  rep.direct = nucc_outcome(direct_closed, B, t_grid, sigma_grid, cfg, opts.pd_tol);

  const TvMatrix back = negate(transpose(dual_closed));
  for (double t : z) {
    rep.dual_back_mismatch =
        std::max(rep.dual_back_mismatch, max_norm(back.eval(t) - direct_closed.eval(t)));
  }
  rep.paths_agree = rep.dual_closed.certified == rep.direct.certified;
  return rep;
}

}  // namespace ltv
