#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ltvobs/ode.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

struct EnvelopeSample {
  double t = 0.0;
  double tau = 0.0;
  double norm = 0.0;  // spectral norm of Phi(t, tau)
};

struct EnvelopeOptions {
  double a_min = 1e-6;  // lower bound on the growth rate a
};

/// Nonuniform bounded growth  ||Phi(t,tau)|| <= K0 e^{eps tau} e^{a |t-tau|}
/// fitted on sampled pairs.
struct GrowthEnvelope {
  double K0 = 1.0;
  double a = 0.0;
  double eps = 0.0;
  // Over the samples, of log(bound) - log(norm): the largest is the
  // looseness, the smallest is ~0 at the tight samples.
  double max_log_residual = 0.0;
  double min_log_residual = 0.0;
  std::vector<double> t_grid;
  std::vector<double> tau_grid;
  std::vector<EnvelopeSample> samples;

  double bound(double t, double tau) const;
  double log_bound(double t, double tau) const;
  // Samples with norm > bound * (1 + rel_slack).
  int coverage_violations(double rel_slack = 1e-9) const;
  // Is some sample within `frac` of the bound?
  bool tight_within(double frac = 0.05) const;
};

/// Fits (K0 >= 1, a >= a_min, eps >= 0) by a linear program in log space.
/// Among envelopes covering every sample, the one with the smallest mean
/// log-gap is returned; K0 is then raised by any residual violation so the
/// coverage invariant holds exactly on the samples.
/// Throws InfeasibleFit on non-finite or non-positive norms, DegenerateGrid
/// when the samples cannot separate the three constants.
GrowthEnvelope fit_growth_envelope(std::vector<EnvelopeSample> samples,
                                   const EnvelopeOptions& opts = {});

/// Samples ||Phi(t,tau)|| on t_grid x tau_grid and fits the envelope.
GrowthEnvelope fit_growth_envelope(const TvMatrix& A, std::span<const double> t_grid,
                                   std::span<const double> tau_grid,
                                   const IntegratorConfig& cfg = {},
                                   const EnvelopeOptions& opts = {});

/// ||Phi(t,tau)|| <= e^{nu tau} alpha(|t-tau|) with alpha tabulated on
/// buckets of |t-tau|. Bucket k covers ((k-1) w, k w].
struct KalmanEnvelope {
  double nu = 0.0;
  double bucket_width = 1.0;
  std::vector<std::pair<double, double>> alpha_table;  // (bucket upper edge, alpha)
  int coverage_violations = 0;
  // Used past the last tabulated bucket.
  double growth_scale = 1.0;
  double growth_rate = 0.0;

  double alpha(double d) const;
};

/// Reads a growth envelope as a Kalman envelope: nu = eps and
/// alpha(d) = K0 e^{a d} evaluated at the bucket's upper edge, then checks
/// coverage on the envelope's own samples.
KalmanEnvelope check_kalman_property(const GrowthEnvelope& env);

/// value(z) <= scale * e^{rate z} over sampled z, used for the gain and
/// output-map envelopes. Zero samples are ignored; if every sample is zero
/// the result is (floor_scale, 0) with identically_zero set.
struct ExpEnvelope {
  double scale = 0.0;
  double rate = 0.0;
  bool identically_zero = false;
  int violations = 0;  // samples above scale e^{rate z} (1 + 1e-9)

  double operator()(double z) const;
};

ExpEnvelope fit_exp_envelope(std::span<const double> z, std::span<const double> values,
                             double floor_scale = 1e-12);

}  // namespace ltv
