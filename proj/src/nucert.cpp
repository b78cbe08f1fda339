#include "ltvobs/nucert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltvobs/error.hpp"
#include "ltvobs/parallel.hpp"

namespace ltv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grids(std::span<const double> t_grid, std::span<const double> sigma_grid) {
  if (t_grid.empty() || sigma_grid.empty()) throw DegenerateGrid("empty t or sigma grid");
  for (double t : t_grid) {
    if (!std::isfinite(t)) throw DegenerateGrid("non-finite grid time");
  }
}

GramianTable make_table(std::span<const double> t_grid, std::span<const double> sigma_grid) {
  GramianTable table;
  table.t_grid.assign(t_grid.begin(), t_grid.end());
  table.sigma_grid.assign(sigma_grid.begin(), sigma_grid.end());
  table.lambda_min.resize(static_cast<Eigen::Index>(t_grid.size()),
                          static_cast<Eigen::Index>(sigma_grid.size()));
  table.lambda_max.resizeLike(table.lambda_min);
  table.entries.resize(t_grid.size() * sigma_grid.size());
  return table;
}

void store_row(GramianTable& table, std::size_t i, const std::vector<GramianResult>& row) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto c = static_cast<Eigen::Index>(j);
    table.lambda_min(r, c) = row[j].lambda_min;
    table.lambda_max(r, c) = row[j].lambda_max;
    table.entries[i * table.sigma_grid.size() + j] = row[j];
  }
}

bool is_pd(double lmin, double lmax, double pd_tol) { return lmin > pd_tol * (1.0 + lmax); }

double slack(double bound) { return kCertSlack * (1.0 + std::fabs(bound)); }

double column_objective(const Eigen::MatrixXd& v, std::span<const double> t,
                        std::span<const int> first, Eigen::Index j, double rate) {
  double sum = 0.0;
  double lo = kInf;
  int count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (first[i] < 0 || j < first[i]) continue;
    const double x = v(static_cast<Eigen::Index>(i), j) + 2.0 * rate * t[i];
    sum += x;
    lo = std::min(lo, x);
    ++count;
  }
  return count == 0 ? 0.0 : sum - count * lo;
}

std::vector<int> first_pd_columns(const GramianTable& table, double pd_tol) {
  std::vector<int> first(table.t_grid.size());
  for (std::size_t i = 0; i < first.size(); ++i) first[i] = first_pd_index(table, i, pd_tol);
  return first;
}

std::vector<double> sigma0_values(const std::vector<int>& first, std::span<const double> sigma_grid) {
  std::vector<double> out;
  out.reserve(first.size());
  for (int f : first) out.push_back(sigma_grid[static_cast<std::size_t>(f)]);
  return out;
}

bool all_equal(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedOnGrid:
      return "CertifiedOnGrid";
    case Verdict::FailedLower:
      return "FailedLower";
    case Verdict::FailedUpper:
      return "FailedUpper";
    case Verdict::Degenerate:
      return "Degenerate";
  }
  return "?";
}

GramianTable obs_table(const TvMatrix& A, const TvMatrix& C, std::span<const double> t_grid,
                       std::span<const double> sigma_grid, const IntegratorConfig& cfg) {
  check_grids(t_grid, sigma_grid);
  GramianTable table = make_table(t_grid, sigma_grid);
  parallel_for(t_grid.size(), [&](std::size_t i) {
    store_row(table, i, obs_gramian_series(A, C, t_grid[i], sigma_grid, cfg));
  });
  return table;
}

ControllabilityTables ctrl_tables(const TvMatrix& A, const TvMatrix& B,
                                  std::span<const double> t_grid,
                                  std::span<const double> sigma_grid, const IntegratorConfig& cfg) {
  check_grids(t_grid, sigma_grid);
  ControllabilityTables out{make_table(t_grid, sigma_grid), make_table(t_grid, sigma_grid)};
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const ControllabilitySeries s = ctrl_gramian_series(A, B, t_grid[i], sigma_grid, cfg);
    store_row(out.W, i, s.W);
    store_row(out.K, i, s.K);
  });
  return out;
}

int first_pd_index(const GramianTable& table, std::size_t row, double pd_tol) {
  const auto r = static_cast<Eigen::Index>(row);
  const int n = static_cast<int>(table.sigma_grid.size());
  auto pd = [&](int j) { return is_pd(table.lambda_min(r, j), table.lambda_max(r, j), pd_tol); };
  int lo = -1;  // largest index known not PD
  int hi = 0;
  while (hi < n && !pd(hi)) {
    lo = hi;
    hi = std::min(n, 2 * hi + 1);
  }
  if (hi >= n) {
    if (!pd(n - 1)) return -1;
    hi = n - 1;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (pd(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

RateFit fit_lower_rate(const Eigen::MatrixXd& log_values, std::span<const double> t_grid,
                       std::span<const int> first_col) {
  const Eigen::Index cols = log_values.cols();
  auto objective = [&](double rate) {
    double f = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) f += column_objective(log_values, t_grid, first_col, j, rate);
    return f;
  };

  // The objective is convex and piecewise linear in the rate; its kinks are
  // where two entries of one column tie for the column minimum.
  std::vector<double> candidates{0.0};
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (first_col[i] < 0 || j < first_col[i]) continue;
      for (std::size_t k = i + 1; k < t_grid.size(); ++k) {
        if (first_col[k] < 0 || j < first_col[k] || t_grid[i] == t_grid[k]) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        const auto kk = static_cast<Eigen::Index>(k);
        const double r = (log_values(kk, j) - log_values(ii, j)) / (2.0 * (t_grid[i] - t_grid[k]));
        if (r > 0.0 && std::isfinite(r)) candidates.push_back(r);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  RateFit fit;
  fit.objective = kInf;
  for (double r : candidates) {
    const double f = objective(r);
    if (!std::isfinite(fit.objective) || f < fit.objective - 1e-12 * (1.0 + std::fabs(fit.objective))) {
      fit.objective = f;
      fit.rate = r;
    }
  }

  fit.log_level.assign(static_cast<std::size_t>(cols), kInf);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (first_col[i] < 0 || j < first_col[i]) continue;
      auto& lvl = fit.log_level[static_cast<std::size_t>(j)];
      lvl = std::min(lvl, log_values(static_cast<Eigen::Index>(i), j) + 2.0 * fit.rate * t_grid[i]);
    }
  }
  return fit;
}

BoundResiduals check_two_sided(const TwoSidedFit& fit, const GramianTable& table,
                               std::span<const int> first_col) {
  BoundResiduals res;
  res.max_lower_log_gap = -kInf;
  res.max_upper_log_gap = -kInf;
  for (std::size_t i = 0; i < table.t_grid.size(); ++i) {
    if (first_col[i] < 0) continue;
    const double t = table.t_grid[i];
    for (std::size_t j = static_cast<std::size_t>(first_col[i]); j < table.sigma_grid.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      const double lmin = table.lambda_min(r, c);
      const double lmax = table.lambda_max(r, c);
      const double lower = fit.lower[j] * std::exp(-2.0 * fit.rate_lower * t);
      const double upper = fit.upper[j] * std::exp(2.0 * fit.rate_upper * t);
      if (lmin < lower - slack(lower)) ++res.lower_violations;
      if (lmax > upper + slack(upper)) ++res.upper_violations;
      if (lmin > 0.0 && lower > 0.0) res.max_lower_log_gap = std::max(res.max_lower_log_gap, std::log(lmin / lower));
      if (lmax > 0.0 && upper > 0.0) res.max_upper_log_gap = std::max(res.max_upper_log_gap, std::log(upper / lmax));
    }
  }
  if (!std::isfinite(res.max_lower_log_gap)) res.max_lower_log_gap = 0.0;
  if (!std::isfinite(res.max_upper_log_gap)) res.max_upper_log_gap = 0.0;
  return res;
}

TwoSidedFit fit_two_sided(const GramianTable& table, std::span<const int> first_col) {
  const Eigen::MatrixXd log_min = table.lambda_min.array().max(std::numeric_limits<double>::min()).log().matrix();
  const Eigen::MatrixXd neg_log_max =
      -table.lambda_max.array().max(std::numeric_limits<double>::min()).log().matrix();
  const RateFit lo = fit_lower_rate(log_min, table.t_grid, first_col);
  const RateFit hi = fit_lower_rate(neg_log_max, table.t_grid, first_col);

  TwoSidedFit fit;
  fit.rate_lower = lo.rate;
  fit.rate_upper = hi.rate;
  const std::size_t cols = table.sigma_grid.size();
  fit.lower.assign(cols, kInf);
  fit.upper.assign(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    if (std::isfinite(lo.log_level[j])) fit.lower[j] = std::exp(lo.log_level[j]);
    if (std::isfinite(hi.log_level[j])) fit.upper[j] = std::exp(-hi.log_level[j]);
  }
  // Lower levels: suffix minimum keeps them valid and non-decreasing.
  for (std::size_t j = cols - 1; j-- > 0;) fit.lower[j] = std::min(fit.lower[j], fit.lower[j + 1]);
  // Upper levels: prefix maximum, with leading empty columns taking the
  // first fitted value.
  const auto first_fitted =
      std::find_if(fit.upper.begin(), fit.upper.end(), [](double u) { return u > 0.0; });
  if (first_fitted != fit.upper.end()) std::fill(fit.upper.begin(), first_fitted, *first_fitted);
  for (std::size_t j = 1; j < cols; ++j) fit.upper[j] = std::max(fit.upper[j], fit.upper[j - 1]);

  const bool finite = std::all_of(fit.lower.begin(), fit.lower.end(),
                                  [](double x) { return std::isfinite(x) && x > 0.0; }) &&
                      std::all_of(fit.upper.begin(), fit.upper.end(),
                                  [](double x) { return std::isfinite(x) && x > 0.0; });
  fit.residuals = check_two_sided(fit, table, first_col);
  if (!finite) {
    fit.verdict = Verdict::Degenerate;
  } else if (fit.residuals.lower_violations > 0) {
    fit.verdict = Verdict::FailedLower;
  } else if (fit.residuals.upper_violations > 0) {
    fit.verdict = Verdict::FailedUpper;
  } else {
    fit.verdict = Verdict::CertifiedOnGrid;
  }
  return fit;
}

NucoCertificate certify_nuco_from_table(GramianTable table, double pd_tol) {
  const std::vector<int> first = first_pd_columns(table, pd_tol);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] < 0) {
      throw NotObservableOnGrid(table.t_grid[i], "M(t, t+sigma) is not positive definite for any grid sigma at t=" +
                                                     std::to_string(table.t_grid[i]));
    }
  }
  const TwoSidedFit fit = fit_two_sided(table, first);
  NucoCertificate cert;
  cert.nu0 = fit.rate_lower;
  cert.nu1 = fit.rate_upper;
  cert.theta0 = fit.lower;
  cert.theta1 = fit.upper;
  cert.sigma0 = sigma0_values(first, table.sigma_grid);
  cert.t_grid = table.t_grid;
  cert.sigma_grid = table.sigma_grid;
  cert.residuals = fit.residuals;
  cert.verdict = fit.verdict;
  cert.uniform = cert.verdict == Verdict::CertifiedOnGrid && cert.nu0 <= kUniformRateTol &&
                 cert.nu1 <= kUniformRateTol && all_equal(cert.sigma0);
  cert.table = std::move(table);
  return cert;
}

NucoCertificate certify_nuco(const TvMatrix& A, const TvMatrix& C, std::span<const double> t_grid,
                             std::span<const double> sigma_grid, const IntegratorConfig& cfg,
                             double pd_tol) {
  return certify_nuco_from_table(obs_table(A, C, t_grid, sigma_grid, cfg), pd_tol);
}

namespace {

// Recomputes lambda bounds for every certified (t, sigma) with an
// independent single-interval solve.
template <typename Compute>
int reverify(std::span<const double> t_grid, std::span<const double> sigma_grid,
             std::span<const double> sigma0, Compute&& compute) {
  std::vector<int> per_t(t_grid.size(), 0);
  parallel_for(t_grid.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < sigma_grid.size(); ++j) {
      if (sigma_grid[j] < sigma0[i]) continue;
      per_t[i] += compute(i, j);
    }
  });
  int total = 0;
  for (int v : per_t) total += v;
  return total;
}

int count_against(const GramianResult& g, double lower, double upper) {
  int v = 0;
  if (g.lambda_min < lower - slack(lower)) ++v;
  if (g.lambda_max > upper + slack(upper)) ++v;
  return v;
}

}  // namespace

int reverify_nuco(const NucoCertificate& cert, const TvMatrix& A, const TvMatrix& C,
                  const IntegratorConfig& cfg) {
  return reverify(cert.t_grid, cert.sigma_grid, cert.sigma0, [&](std::size_t i, std::size_t j) {
    const double t = cert.t_grid[i];
    const GramianResult g = obs_gramian(A, C, t, cert.sigma_grid[j], cfg);
    return count_against(g, cert.theta0[j] * std::exp(-2.0 * cert.nu0 * t),
                         cert.theta1[j] * std::exp(2.0 * cert.nu1 * t));
  });
}

NuccCertificate certify_nucc(const TvMatrix& A, const TvMatrix& B, std::span<const double> t_grid,
                             std::span<const double> sigma_grid, const IntegratorConfig& cfg,
                             double pd_tol) {
  ControllabilityTables tables = ctrl_tables(A, B, t_grid, sigma_grid, cfg);
  std::vector<int> first(t_grid.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    const int fw = first_pd_index(tables.W, i, pd_tol);
    const int fk = first_pd_index(tables.K, i, pd_tol);
    if (fw < 0 || fk < 0) {
      throw NotControllableOnGrid(t_grid[i], "W or K is not positive definite for any grid sigma at t=" +
                                                 std::to_string(t_grid[i]));
    }
    first[i] = std::max(fw, fk);
  }
  const TwoSidedFit w = fit_two_sided(tables.W, first);
  const TwoSidedFit k = fit_two_sided(tables.K, first);

  NuccCertificate cert;
  cert.mu0 = w.rate_lower;
  cert.mu1 = w.rate_upper;
  cert.mu0_tilde = k.rate_lower;
  cert.mu1_tilde = k.rate_upper;
  cert.alpha0 = w.lower;
  cert.alpha1 = w.upper;
  cert.beta0 = k.lower;
  cert.beta1 = k.upper;
  cert.sigma0 = sigma0_values(first, sigma_grid);
  cert.t_grid.assign(t_grid.begin(), t_grid.end());
  cert.sigma_grid.assign(sigma_grid.begin(), sigma_grid.end());
  cert.w_residuals = w.residuals;
  cert.k_residuals = k.residuals;
  if (w.verdict == Verdict::Degenerate || k.verdict == Verdict::Degenerate) {
    cert.verdict = Verdict::Degenerate;
  } else if (w.verdict == Verdict::FailedLower || k.verdict == Verdict::FailedLower) {
    cert.verdict = Verdict::FailedLower;
  } else if (w.verdict == Verdict::FailedUpper || k.verdict == Verdict::FailedUpper) {
    cert.verdict = Verdict::FailedUpper;
  } else {
    cert.verdict = Verdict::CertifiedOnGrid;
  }
  const double max_rate = std::max({cert.mu0, cert.mu1, cert.mu0_tilde, cert.mu1_tilde});
  cert.uniform = cert.verdict == Verdict::CertifiedOnGrid && max_rate <= kUniformRateTol &&
                 all_equal(cert.sigma0);
  cert.tables = std::move(tables);
  return cert;
}

int reverify_nucc(const NuccCertificate& cert, const TvMatrix& A, const TvMatrix& B,
                  const IntegratorConfig& cfg) {
  return reverify(cert.t_grid, cert.sigma_grid, cert.sigma0, [&](std::size_t i, std::size_t j) {
    const double t = cert.t_grid[i];
    const double s[1] = {cert.sigma_grid[j]};
    const ControllabilitySeries g = ctrl_gramian_series(A, B, t, s, cfg);
    return count_against(g.W.front(), cert.alpha0[j] * std::exp(-2.0 * cert.mu0 * t),
                         cert.alpha1[j] * std::exp(2.0 * cert.mu1 * t)) +
           count_against(g.K.front(), cert.beta0[j] * std::exp(-2.0 * cert.mu0_tilde * t),
                         cert.beta1[j] * std::exp(2.0 * cert.mu1_tilde * t));
  });
}

CertOutcome nuco_outcome(const TvMatrix& A, const TvMatrix& C, std::span<const double> t_grid,
                         std::span<const double> sigma_grid, const IntegratorConfig& cfg,
                         double pd_tol) {
  try {
    const Verdict v = certify_nuco(A, C, t_grid, sigma_grid, cfg, pd_tol).verdict;
    return {v == Verdict::CertifiedOnGrid, to_string(v)};
  } catch (const NotObservableOnGrid& e) {
    return {false, e.code()};
  }
}

CertOutcome nucc_outcome(const TvMatrix& A, const TvMatrix& B, std::span<const double> t_grid,
                         std::span<const double> sigma_grid, const IntegratorConfig& cfg,
                         double pd_tol) {
  try {
    const Verdict v = certify_nucc(A, B, t_grid, sigma_grid, cfg, pd_tol).verdict;
    return {v == Verdict::CertifiedOnGrid, to_string(v)};
  } catch (const NotControllableOnGrid& e) {
    return {false, e.code()};
  }
}

TwoImplyThirdReport check_two_imply_third(const TvMatrix& A, const TvMatrix& B,
                                          std::span<const double> t_grid,
                                          std::span<const double> sigma_grid,
                                          const IntegratorConfig& cfg, double pd_tol) {
  const ControllabilityTables tables = ctrl_tables(A, B, t_grid, sigma_grid, cfg);
  auto bounds_hold = [&](const GramianTable& table) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (first_pd_index(table, i, pd_tol) < 0) return false;
    }
    std::vector<int> first(t_grid.size());
    for (std::size_t i = 0; i < first.size(); ++i) first[i] = first_pd_index(table, i, pd_tol);
    return fit_two_sided(table, first).verdict == Verdict::CertifiedOnGrid;
  };

  TwoImplyThirdReport rep;
  rep.w_bounds = bounds_hold(tables.W);
  rep.k_bounds = bounds_hold(tables.K);
  try {
    const GrowthEnvelope env = fit_growth_envelope(A, t_grid, t_grid, cfg);
    rep.kalman = check_kalman_property(env).coverage_violations == 0;
  } catch (const InfeasibleFit&) {
    rep.kalman = false;
  } catch (const DegenerateGrid&) {
    rep.kalman = false;
  }
  rep.properties_holding = int{rep.w_bounds} + int{rep.k_bounds} + int{rep.kalman};

  struct Prop {
    const char* name;
    bool holds;
  };
  const Prop props[3] = {{"W-bounds", rep.w_bounds}, {"K-bounds", rep.k_bounds}, {"Kalman", rep.kalman}};
  for (int c = 0; c < 3; ++c) {
    const Prop& pa = props[(c + 1) % 3];
    const Prop& pb = props[(c + 2) % 3];
    if (!(pa.holds && pb.holds)) continue;
    Implication imp{pa.name, pb.name, props[c].name, props[c].holds};
    if (!imp.holds) {
      rep.findings.push_back(std::string(pa.name) + " and " + pb.name + " hold but " + props[c].name +
                             " fails on the grid");
    }
    rep.tested.push_back(std::move(imp));
  }
  if (rep.tested.empty()) {
    rep.note = "fewer than two properties hold on the grid; no implication tested";
  }
  return rep;
}

}  // namespace ltv
