#include "ltvobs/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ltvobs/error.hpp"
#include "ltvobs/flow.hpp"
#include "ltvobs/linalg.hpp"
#include "ltvobs/lp.hpp"
#include "ltvobs/parallel.hpp"

namespace ltv {

namespace {

constexpr double kCoverSlack = 1e-9;

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

double GrowthEnvelope::log_bound(double t, double tau) const {
  return std::log(K0) + eps * tau + a * std::fabs(t - tau);
}

double GrowthEnvelope::bound(double t, double tau) const { return std::exp(log_bound(t, tau)); }

int GrowthEnvelope::coverage_violations(double rel_slack) const {
  int count = 0;
  for (const auto& s : samples) {
    if (s.norm > bound(s.t, s.tau) * (1.0 + rel_slack)) ++count;
  }
  return count;
}

bool GrowthEnvelope::tight_within(double frac) const {
  return std::any_of(samples.begin(), samples.end(), [&](const EnvelopeSample& s) {
    return s.norm >= (1.0 - frac) * bound(s.t, s.tau);
  });
}

GrowthEnvelope fit_growth_envelope(std::vector<EnvelopeSample> samples, const EnvelopeOptions& opts) {
  if (samples.size() < 2) throw DegenerateGrid("envelope fit needs at least two samples");
  if (!(opts.a_min > 0.0)) throw ConfigError("a_min must be positive");

  const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd G(n, 3);
  Eigen::VectorXd rhs(n);
  Eigen::VectorXd y(n);
  double mean_d = 0.0;
  double mean_tau = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (!std::isfinite(s.norm) || !(s.norm > 0.0) || !std::isfinite(s.t) || !std::isfinite(s.tau)) {
      throw InfeasibleFit("non-finite or non-positive transition norm in envelope samples");
    }
    if (s.tau < 0.0) throw DegenerateGrid("envelope samples need tau >= 0");
    const double d = std::fabs(s.t - s.tau);
    y(i) = std::log(s.norm);
    // Variables: (log K0, a - a_min, eps), all non-negative.
    G(i, 0) = 1.0;
    G(i, 1) = d;
    G(i, 2) = s.tau;
    rhs(i) = y(i) - opts.a_min * d;
    mean_d += d;
    mean_tau += s.tau;
  }
  mean_d /= static_cast<double>(n);
  mean_tau /= static_cast<double>(n);
  if (!(mean_d > 0.0)) throw DegenerateGrid("all samples have t == tau");

  Eigen::Vector3d cost(1.0, mean_d, mean_tau);
  const CoveringLpResult lp = solve_covering_lp(G, rhs, cost);

  GrowthEnvelope env;
  double log_k0 = lp.x(0);
  env.a = opts.a_min + lp.x(1);
  env.eps = lp.x(2);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    worst = std::max(worst, rhs(i) - G.row(i).dot(lp.x));
  }
  log_k0 += worst;
  env.K0 = std::exp(log_k0);

  env.max_log_residual = -std::numeric_limits<double>::infinity();
  env.min_log_residual = std::numeric_limits<double>::infinity();
  std::vector<double> ts;
  std::vector<double> taus;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    const double r = env.log_bound(s.t, s.tau) - y(i);
    env.max_log_residual = std::max(env.max_log_residual, r);
    env.min_log_residual = std::min(env.min_log_residual, r);
    ts.push_back(s.t);
    taus.push_back(s.tau);
  }
  env.t_grid = sorted_unique(std::move(ts));
  env.tau_grid = sorted_unique(std::move(taus));
  env.samples = std::move(samples);
  return env;
}

GrowthEnvelope fit_growth_envelope(const TvMatrix& A, std::span<const double> t_grid,
                                   std::span<const double> tau_grid, const IntegratorConfig& cfg,
                                   const EnvelopeOptions& opts) {
  if (A.empty() || !A.is_square()) throw DimensionMismatch("plant matrix must be square");
  if (t_grid.empty() || tau_grid.empty()) throw DegenerateGrid("empty envelope grid");
  std::vector<std::vector<EnvelopeSample>> per_tau(tau_grid.size());
  parallel_for(tau_grid.size(), [&](std::size_t k) {
    const double tau = tau_grid[k];
    const std::vector<Eigen::MatrixXd> phis = transition_from(A, tau, t_grid, cfg);
    auto& out = per_tau[k];
    out.reserve(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      out.push_back({t_grid[i], tau, spectral_norm(phis[i])});
    }
  });
  std::vector<EnvelopeSample> samples;
  samples.reserve(t_grid.size() * tau_grid.size());
  for (auto& v : per_tau) samples.insert(samples.end(), v.begin(), v.end());
  return fit_growth_envelope(std::move(samples), opts);
}

double KalmanEnvelope::alpha(double d) const {
  d = std::fabs(d);
  const auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(d / bucket_width - 1e-9)));
  if (k < alpha_table.size()) return alpha_table[k].second;
  return growth_scale * std::exp(growth_rate * static_cast<double>(k) * bucket_width);
}

KalmanEnvelope check_kalman_property(const GrowthEnvelope& env) {
  KalmanEnvelope ke;
  ke.nu = env.eps;
  ke.growth_scale = env.K0;
  ke.growth_rate = env.a;

  std::vector<double> dists;
  dists.reserve(env.samples.size());
  for (const auto& s : env.samples) dists.push_back(std::fabs(s.t - s.tau));
  dists = sorted_unique(std::move(dists));
  const double d_max = dists.empty() ? 0.0 : dists.back();
  double width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < dists.size(); ++i) {
    const double gap = dists[i] - dists[i - 1];
    if (gap > 1e-12 * (1.0 + d_max)) width = std::min(width, gap);
  }
  ke.bucket_width = std::isfinite(width) ? width : 1.0;

  const auto buckets = static_cast<std::size_t>(std::ceil(d_max / ke.bucket_width - 1e-9)) + 1;
  for (std::size_t k = 0; k < buckets; ++k) {
    const double edge = static_cast<double>(k) * ke.bucket_width;
    ke.alpha_table.emplace_back(edge, env.K0 * std::exp(env.a * edge));
  }
  for (const auto& s : env.samples) {
    const double b = std::exp(ke.nu * s.tau) * ke.alpha(s.t - s.tau);
    if (s.norm > b * (1.0 + kCoverSlack)) ++ke.coverage_violations;
  }
  return ke;
}

double ExpEnvelope::operator()(double z) const { return scale * std::exp(rate * z); }

ExpEnvelope fit_exp_envelope(std::span<const double> z, std::span<const double> values,
                             double floor_scale) {
  if (z.size() != values.size() || z.empty()) throw DegenerateGrid("exp envelope: bad sample set");
  struct Pt {
    double z, y;
  };
  std::vector<Pt> pts;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw InfeasibleFit("exp envelope: values must be finite and non-negative");
    }
    if (values[i] > 0.0) pts.push_back({z[i], std::log(values[i])});
  }
  ExpEnvelope env;
  if (pts.empty()) {
    env.scale = floor_scale;
    env.rate = 0.0;
    env.identically_zero = true;
    return env;
  }

  // The mean log-gap of a covering line is its value at the mean abscissa,
  // so the optimum is the upper-hull edge above that point.
  std::sort(pts.begin(), pts.end(), [](const Pt& p, const Pt& q) {
    return p.z < q.z || (p.z == q.z && p.y > q.y);
  });
  const double z_bar =
      std::accumulate(pts.begin(), pts.end(), 0.0, [](double acc, const Pt& p) { return acc + p.z; }) /
      static_cast<double>(pts.size());
  std::vector<Pt> hull;
  for (const Pt& p : pts) {
    if (!hull.empty() && hull.back().z == p.z) continue;
    while (hull.size() >= 2) {
      const Pt& o = hull[hull.size() - 2];
      const Pt& m = hull.back();
      const double cross = (m.z - o.z) * (p.y - o.y) - (m.y - o.y) * (p.z - o.z);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }

  double log_scale = hull.front().y;
  env.rate = 0.0;
  if (hull.size() >= 2) {
    std::size_t k = 0;
    while (k + 2 < hull.size() && hull[k + 1].z < z_bar) ++k;
    env.rate = (hull[k + 1].y - hull[k].y) / (hull[k + 1].z - hull[k].z);
    log_scale = hull[k].y - env.rate * hull[k].z;
  }
  double worst = 0.0;
  for (const Pt& p : pts) worst = std::max(worst, p.y - (log_scale + env.rate * p.z));
  env.scale = std::exp(log_scale + worst);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (values[i] > env(z[i]) * (1.0 + kCoverSlack)) ++env.violations;
  }
  return env;
}

}  // namespace ltv
