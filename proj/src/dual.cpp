#include "ltvobs/dual.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ltvobs/error.hpp"
#include "ltvobs/flow.hpp"
#include "ltvobs/gramian.hpp"
#include "ltvobs/linalg.hpp"
#include "ltvobs/parallel.hpp"

namespace ltv {

namespace {

// Independently integrated transitions agree to ~rel_tol; the dual bound is
// exact for some plants, so it is compared with this relative slack.
constexpr double kDualBoundSlack = 1e-7;

}  // namespace

DualSystem dualize(const TvMatrix& A, const TvMatrix& C) {
  if (A.empty() || !A.is_square()) throw DimensionMismatch("dualize: A must be square");
  if (C.empty() || C.cols() != A.rows()) throw DimensionMismatch("dualize: C must have n columns");
  return {negate(transpose(A)), transpose(C)};
}

GramianIdentityReport check_gramian_identity(const TvMatrix& A, const TvMatrix& C,
                                             std::span<const double> t_grid,
                                             std::span<const double> sigma_grid,
                                             const IntegratorConfig& cfg) {
  const DualSystem d = dualize(A, C);
  struct RowWorst {
    double dev = -1.0;
    double sigma = 0.0;
  };
  std::vector<RowWorst> rows(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const auto m = obs_gramian_series(A, C, t_grid[i], sigma_grid, cfg);
    const auto w = ctrl_gramian_series(d.A_dual, d.B_dual, t_grid[i], sigma_grid, cfg).W;
    for (std::size_t j = 0; j < sigma_grid.size(); ++j) {
      const double dev = max_norm(m[j].matrix - w[j].matrix) / (1.0 + max_norm(m[j].matrix));
      if (dev > rows[i].dev) rows[i] = {dev, sigma_grid[j]};
    }
  });
  GramianIdentityReport rep;
  rep.points = static_cast<int>(t_grid.size() * sigma_grid.size());
  rep.max_deviation = -1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].dev > rep.max_deviation) {
      rep.max_deviation = rows[i].dev;
      rep.worst_t = t_grid[i];
      rep.worst_sigma = rows[i].sigma;
    }
  }
  rep.max_deviation = std::max(rep.max_deviation, 0.0);
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

DualityReport check_duality_theorem(const TvMatrix& A, const TvMatrix& C,
                                    std::span<const double> t_grid,
                                    std::span<const double> sigma_grid,
                                    const IntegratorConfig& cfg, double pd_tol) {
  DualityReport rep;
  try {
    rep.envelope = fit_growth_envelope(A, t_grid, t_grid, cfg);
  } catch (const InfeasibleFit& e) {
    throw HypothesisUnmet("growthEnvelope", std::string("plant admits no growth envelope: ") + e.what());
  } catch (const DegenerateGrid& e) {
    throw HypothesisUnmet("growthEnvelope", std::string("plant admits no growth envelope: ") + e.what());
  }
  const DualSystem d = dualize(A, C);

  std::optional<NucoCertificate> primal;
  try {
    primal = certify_nuco(A, C, t_grid, sigma_grid, cfg, pd_tol);
    rep.primal = {primal->verdict == Verdict::CertifiedOnGrid, to_string(primal->verdict)};
  } catch (const NotObservableOnGrid& e) {
    rep.primal = {false, e.code()};
  }
  std::optional<NuccCertificate> dual;
  try {
    dual = certify_nucc(d.A_dual, d.B_dual, t_grid, sigma_grid, cfg, pd_tol);
    rep.dual = {dual->verdict == Verdict::CertifiedOnGrid, to_string(dual->verdict)};
  } catch (const NotControllableOnGrid& e) {
    rep.dual = {false, e.code()};
  }
  rep.verdicts_agree = rep.primal.certified == rep.dual.certified;
  if (primal && dual && rep.primal.certified && rep.dual.certified) {
    rep.nu0 = primal->nu0;
    rep.nu1 = primal->nu1;
    rep.mu0 = dual->mu0;
    rep.mu1 = dual->mu1;
    rep.max_rate_gap = std::max(std::fabs(rep.nu0 - rep.mu0), std::fabs(rep.nu1 - rep.mu1));
    rep.rates_match = rep.max_rate_gap <= rep.rate_slack;
  }

  // ||Psi(t, tau)|| <= K0 e^{(a + eps)|t - tau| + eps tau}.
  const GrowthEnvelope& env = rep.envelope;
  std::vector<std::pair<int, double>> per_tau(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t k) {
    const double tau = t_grid[k];
    const auto psi = transition_from(d.A_dual, tau, t_grid, cfg);
    int violations = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double bound = env.K0 * std::exp((env.a + env.eps) * std::fabs(t_grid[i] - tau) + env.eps * tau);
      const double ratio = spectral_norm(psi[i]) / bound;
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + kDualBoundSlack) ++violations;
    }
    per_tau[k] = {violations, worst};
  });
  for (const auto& [v, w] : per_tau) {
    rep.dual_bound_violations += v;
    rep.max_dual_bound_ratio = std::max(rep.max_dual_bound_ratio, w);
  }
  rep.dual_bound_pairs = static_cast<int>(t_grid.size() * t_grid.size());
  return rep;
}

}  // namespace ltv
