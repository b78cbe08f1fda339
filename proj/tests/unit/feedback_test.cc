#include "ltvobs/feedback.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ltvobs/error.hpp"
#include "ltvobs/flow.hpp"
#include "ltvobs/gramian.hpp"
#include "oracles.hpp"

namespace ltv {
namespace {

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

TvMatrix m(const std::vector<std::vector<std::string>>& rows) { return TvMatrix::parse(rows); }

// Decaying outputs shrink the Gramians like e^{-2t}; a short horizon keeps
// them above the positive-definiteness floor.
const std::vector<double> kT = grid(0, 5, 11);
const std::vector<double> kSigma = grid(0.25, 4, 16);

// Phi of a(t) = -e^{-0.9t}.
double closed_phi(double t2, double t1) {
  return std::exp((std::exp(-0.9 * t2) - std::exp(-0.9 * t1)) / 0.9);
}

TEST(CloseLoop, ZeroGainKeepsPlant) {
  const TvMatrix A = m({{"sin(t)", "1"}, {"-t", "0"}});
  const TvMatrix closed = close_loop(A, m({{"0"}, {"0"}}), m({{"1", "t"}}));
  for (double t : {0.0, 1.0, 3.5}) EXPECT_EQ(closed.eval(t), A.eval(t));
}

TEST(CloseLoop, ScalarProduct) {
  const TvMatrix closed = close_loop(m({{"0"}}), m({{"exp(0.1*t)"}}), m({{"exp(-1.0*t)"}}));
  for (double t : {0.0, 0.5, 2.0, 9.0}) {
    EXPECT_NEAR(closed.eval(t)(0, 0), -std::exp(-0.9 * t), 1e-15);
  }
}

TEST(CloseLoop, Structural) {
  const TvMatrix closed = close_loop(m({{"0", "1"}, {"0", "0"}}), m({{"0"}, {"1"}}), m({{"1", "0"}}));
  Eigen::Matrix2d expected;
  expected << 0, 1, -1, 0;
  EXPECT_EQ(closed.eval(1.0), Eigen::MatrixXd(expected));
}

TEST(CloseLoop, EvaluatesExactlyAtRandomTimes) {
  const TvMatrix A = m({{"-1", "sin(t)"}, {"t", "0"}});
  const TvMatrix K = m({{"exp(0.1*t)"}, {"2"}});
  const TvMatrix C = m({{"cos(t)", "exp(-t)"}});
  const TvMatrix closed = close_loop(A, K, C);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pick(0.0, 20.0);
  for (int k = 0; k < 20; ++k) {
    const double t = pick(rng);
    EXPECT_EQ(closed.eval(t), A.eval(t) - K.eval(t) * C.eval(t));
  }
}

TEST(CloseLoop, RejectsBadShapes) {
  EXPECT_THROW(close_loop(m({{"0"}}), m({{"1", "1"}}), m({{"1"}})), DimensionMismatch);
  EXPECT_THROW(close_loop(m({{"0", "0"}}), m({{"1"}}), m({{"1"}})), DimensionMismatch);
}

TEST(FeedbackGains, ExponentialEnvelopesAreExact) {
  const TvMatrix A = m({{"0"}});
  const auto z = feedback_support(kT, kSigma);
  const GrowthEnvelope env = fit_growth_envelope(A, z, z);
  const FeedbackGains g = fit_feedback_gains(m({{"exp(0.1*t)"}}), m({{"exp(-t)"}}), env, z);
  EXPECT_NEAR(g.script_K, 1.0, 1e-9);
  EXPECT_NEAR(g.delta, 0.1, 1e-9);
  EXPECT_NEAR(g.script_C, 1.0, 1e-9);
  EXPECT_NEAR(g.gamma, 1.0, 1e-9);
  EXPECT_EQ(g.envelope_violations, 0);
  EXPECT_NEAR(g.ged, 0.9, 1e-6);
}

TEST(FeedbackGains, ZeroGainIsFloored) {
  const auto z = feedback_support(kT, kSigma);
  const GrowthEnvelope env = fit_growth_envelope(m({{"0"}}), z, z);
  const FeedbackGains g = fit_feedback_gains(m({{"0"}}), m({{"exp(-t)"}}), env, z);
  EXPECT_TRUE(g.gain_identically_zero);
  EXPECT_EQ(g.script_K, kGainFloor);
  EXPECT_GT(g.ged, 0.0);
  EXPECT_GT(g.aed, 0.0);
}

TEST(FeedbackSupport, CoversShiftedHorizon) {
  const auto z = feedback_support(kT, kSigma, 0.5);
  EXPECT_EQ(z.front(), 0.0);
  EXPECT_NEAR(z.back(), 9.0, 1e-12);
  for (std::size_t i = 1; i < z.size(); ++i) EXPECT_LE(z[i] - z[i - 1], 0.5 + 1e-12);
}

TEST(Phi, ClassificationFromConstants) {
  GrowthEnvelope env;
  env.K0 = 1.0;
  env.a = 0.05;
  env.eps = 0.0;
  FeedbackGains g;
  g.script_K = 1.0;
  g.script_C = 1.0;
  g.delta = 0.1;
  g.gamma = 1.0;
  apply_overrides({}, env, g);
  const double phi = feedback_phi(env, g);
  EXPECT_NEAR(phi, 1.0 / (4 * 0.05 * 0.9), 1e-12);
  EXPECT_NEAR(phi, 5.5556, 1e-4);
  EXPECT_EQ(classify_phi(phi), PhiCase::PhiGreater);
  EXPECT_EQ(classify_phi(0.5), PhiCase::PhiLess);
  EXPECT_EQ(classify_phi(1.0 + 1e-8), PhiCase::PhiEqualsOne);
}

TEST(Phi, LowerBoundCases) {
  const double num = 0.25 * std::exp(-(4 * 0.1 + 2 * 0.2) * 2.0);
  EXPECT_NEAR(lambda_lower_bound(PhiCase::PhiLess, 0.5, 0.5, 2.0, 0.1, 0.2, 2.0), num / 8.0, 1e-15);
  EXPECT_NEAR(lambda_lower_bound(PhiCase::PhiGreater, 11.0, 0.5, 2.0, 0.1, 0.2, 2.0), num / 20.0,
              1e-15);
  EXPECT_NEAR(lambda_lower_bound(PhiCase::PhiGreater, 2.0, 0.5, 2.0, 0.1, 0.2, 2.0), num / 8.0,
              1e-15);
  EXPECT_NEAR(lambda_upper_bound(1.0, 2.0, 0.1, 5.0), 12.0 * std::exp(1.0), 1e-12);
}

TEST(ClosedGrowth, ZeroGainReducesToPlantBound) {
  const TvMatrix A = m({{"0", "1"}, {"-1", "0"}});
  const TvMatrix K = m({{"0"}, {"0"}});
  const TvMatrix C = m({{"exp(-t)", "0"}});
  const auto z = feedback_support(kT, kSigma);
  const GrowthEnvelope env = fit_growth_envelope(A, z, z);
  const FeedbackGains g = fit_feedback_gains(K, C, env, z);
  const ClosedGrowthReport r = verify_closed_growth(A, K, C, g, env, kT);
  EXPECT_NEAR(r.gronwall_factor, env.K0, 1e-9);
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.pairs, 11 * 12 / 2);
}

TEST(ClosedGrowth, ScalarClosedForm) {
  const TvMatrix A = m({{"0"}});
  const TvMatrix K = m({{"exp(0.1*t)"}});
  const TvMatrix C = m({{"exp(-t)"}});
  const auto z = feedback_support(kT, kSigma);
  const GrowthEnvelope env = fit_growth_envelope(A, z, z);
  const FeedbackGains g = fit_feedback_gains(K, C, env, z);
  const ClosedGrowthReport r = verify_closed_growth(A, K, C, g, env, kT);
  EXPECT_NEAR(r.gronwall_factor, std::exp(1.0 / 0.9), 1e-6);
  EXPECT_EQ(r.violations, 0);
  EXPECT_LE(r.max_ratio, 1.0);

  const TvMatrix closed = close_loop(A, K, C);
  for (double t1 : {0.0, 1.5, 3.0}) {
    for (double t2 : {t1, t1 + 0.5, 5.0}) {
      EXPECT_NEAR(transition(closed, t2, t1)(0, 0), closed_phi(t2, t1), 1e-8);
    }
  }
}

TEST(ClosedGrowth, GuardsCondition) {
  const TvMatrix A = m({{"0"}});
  const TvMatrix K = m({{"exp(0.5*t)"}});
  const TvMatrix C = m({{"exp(-0.2*t)"}});
  const auto z = feedback_support(kT, kSigma);
  const GrowthEnvelope env = fit_growth_envelope(A, z, z);
  const FeedbackGains g = fit_feedback_gains(K, C, env, z);
  try {
    verify_closed_growth(A, K, C, g, env, kT);
    FAIL() << "expected HypothesisUnmet";
  } catch (const HypothesisUnmet& e) {
    EXPECT_EQ(e.condition(), "conditionGED");
  }
}

TEST(Preservation, ScalarPhiGreaterAgainstQuadrature) {
  const TvMatrix A = m({{"0"}});
  const TvMatrix B = m({{"1"}});
  const TvMatrix F = m({{"exp(0.1*t)"}});
  const TvMatrix C = m({{"exp(-t)"}});
  const FeedbackCheck r = verify_preservation(A, B, F, C, kT, kSigma);
  EXPECT_TRUE(r.hypotheses_met);
  EXPECT_EQ(r.phi_case, PhiCase::PhiGreater);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(r.plant.certified);
  EXPECT_TRUE(r.closed.certified);
  ASSERT_FALSE(r.samples.empty());
  for (const LambdaSample& s : r.samples) {
    const double oracle = testing::gauss_legendre(
        [&](double u) { return std::exp(-2 * u) * closed_phi(u, s.t) * closed_phi(u, s.t); }, s.t,
        s.t + s.sigma);
    EXPECT_NEAR(s.observed_min, oracle, 1e-8 * (1 + oracle));
    EXPECT_LE(s.lower, oracle);
    EXPECT_LE(oracle, s.upper);
  }
}

TEST(Preservation, ScalarPhiLess) {
  const FeedbackCheck r = verify_preservation(m({{"0"}}), m({{"1"}}), m({{"0.2*exp(0.3*t)"}}),
                                              m({{"exp(-1.5*t)"}}), kT, kSigma);
  EXPECT_EQ(r.phi_case, PhiCase::PhiLess);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(r.verdicts_agree);
}

TEST(Preservation, ZeroFeedbackMatchesPlant) {
  const TvMatrix A = m({{"0", "1"}, {"-1", "0"}});
  const TvMatrix C = m({{"exp(-t)", "0"}});
  const FeedbackCheck r = verify_preservation(A, m({{"1"}, {"0"}}), m({{"0"}}), C, kT, kSigma);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.plant.status, r.closed.status);
  EXPECT_LT(r.phi, 1e-9);
  const NucoCertificate plant = certify_nuco(A, C, kT, kSigma);
  for (const LambdaSample& s : r.samples) {
    EXPECT_GE(s.observed_min, 0.0);
    EXPECT_LE(s.observed_max, plant.table.lambda_max.maxCoeff() * (1 + 1e-8));
  }
}

TEST(Preservation, ProbesAreSeeded) {
  const TvMatrix A = m({{"0", "1"}, {"-1", "0"}});
  const TvMatrix K = m({{"0.1*exp(0.2*t)"}, {"0"}});
  const TvMatrix C = m({{"exp(-t)", "0"}});
  const FeedbackCheck a = verify_output_injection(A, K, C, kT, kSigma);
  const FeedbackCheck b = verify_output_injection(A, K, C, kT, kSigma);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].observed_min, b.samples[i].observed_min);
    EXPECT_EQ(a.samples[i].observed_max, b.samples[i].observed_max);
  }
  EXPECT_TRUE(a.violations.empty());
}

TEST(Preservation, UnmetConditionNamed) {
  try {
    verify_output_injection(m({{"-0.5"}}), m({{"0"}}), m({{"exp(-0.2*t)"}}), kT, kSigma);
    FAIL() << "expected HypothesisUnmet";
  } catch (const HypothesisUnmet& e) {
    EXPECT_EQ(e.condition(), "conditionAED");
  }
  FeedbackOptions opts;
  opts.require_hypotheses = false;
  const FeedbackCheck r =
      verify_output_injection(m({{"-0.5"}}), m({{"0"}}), m({{"exp(-0.2*t)"}}), kT, kSigma, {}, opts);
  EXPECT_FALSE(r.hypotheses_met);
  EXPECT_EQ(r.unmet_conditions, std::vector<std::string>{"conditionAED"});
  EXPECT_TRUE(r.verdicts_agree);
}

TEST(Preservation, OverridesReplaceFit) {
  FeedbackOptions opts;
  opts.overrides.a = 0.05;
  const FeedbackCheck r = verify_output_injection(m({{"0"}}), m({{"exp(0.1*t)"}}), m({{"exp(-t)"}}),
                                                  kT, kSigma, {}, opts);
  EXPECT_EQ(r.plant_envelope.a, 0.05);
  EXPECT_NEAR(r.phi, 1.0 / (4 * 0.05 * 0.9), 1e-6);
}

TEST(Preservation, UnobservablePlantThrows) {
  EXPECT_THROW(verify_output_injection(m({{"0"}}), m({{"0"}}), m({{"0"}}), kT, kSigma),
               NotObservableOnGrid);
}

TEST(InputFeedback, ScalarPathsAgree) {
  const InputFeedbackReport r =
      verify_input_feedback(m({{"0"}}), m({{"exp(-t)"}}), m({{"exp(0.1*t)"}}), kT, kSigma);
  EXPECT_NEAR(r.bel, 0.9, 1e-6);
  ASSERT_TRUE(r.dual_path.has_value());
  EXPECT_TRUE(r.dual_path->violations.empty());
  EXPECT_TRUE(r.dual_closed.certified);
  EXPECT_TRUE(r.direct.certified);
  EXPECT_TRUE(r.paths_agree);
  EXPECT_EQ(r.dual_back_mismatch, 0.0);
}

TEST(InputFeedback, ZeroGain) {
  const InputFeedbackReport r = verify_input_feedback(m({{"0", "1"}, {"-1", "0"}}), m({{"0"}, {"exp(-t)"}}),
                                                      m({{"0", "0"}}), kT, kSigma);
  EXPECT_TRUE(r.paths_agree);
  EXPECT_TRUE(r.direct.certified);
}

TEST(InputFeedback, GuardsCondition) {
  try {
    verify_input_feedback(m({{"0"}}), m({{"exp(-0.1*t)"}}), m({{"exp(0.2*t)"}}), kT, kSigma);
    FAIL() << "expected HypothesisUnmet";
  } catch (const HypothesisUnmet& e) {
    EXPECT_EQ(e.condition(), "conditionBEL");
  }
}

}  // namespace
}  // namespace ltv
