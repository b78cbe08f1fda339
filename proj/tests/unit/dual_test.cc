#include "ltvobs/dual.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ltvobs/error.hpp"

namespace ltv {
namespace {

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

TvMatrix m(const std::vector<std::vector<std::string>>& rows) { return TvMatrix::parse(rows); }

const std::vector<double> kT = grid(0, 20, 21);
const std::vector<double> kSigma = grid(0.25, 8, 16);

TEST(Dualize, ScalarZero) {
  const DualSystem d = dualize(m({{"0"}}), m({{"1"}}));
  EXPECT_EQ(d.A_dual.rows(), 1);
  EXPECT_EQ(d.A_dual.eval(3.0)(0, 0), 0.0);
  EXPECT_EQ(d.B_dual.eval(3.0)(0, 0), 1.0);
}

TEST(Dualize, NilpotentShapes) {
  const DualSystem d = dualize(m({{"0", "1"}, {"0", "0"}}), m({{"1", "0"}}));
  ASSERT_EQ(d.B_dual.rows(), 2);
  ASSERT_EQ(d.B_dual.cols(), 1);
  Eigen::Matrix2d expected;
  expected << 0, 0, -1, 0;
  EXPECT_EQ(d.A_dual.eval(0.7), Eigen::MatrixXd(expected));
  EXPECT_EQ(d.B_dual.eval(0.7), Eigen::MatrixXd(Eigen::Vector2d(1, 0)));
}

TEST(Dualize, TimeVarying) {
  const DualSystem d = dualize(m({{"t"}}), m({{"exp(-t)"}}));
  for (double t : {0.0, 1.5, 4.0}) {
    EXPECT_EQ(d.A_dual.eval(t)(0, 0), -t);
    EXPECT_EQ(d.B_dual.eval(t)(0, 0), std::exp(-t));
  }
}

TEST(Dualize, EvaluatesToNegatedTranspose) {
  const TvMatrix A = m({{"sin(t)", "t^2"}, {"exp(-t)", "1/(1+t)"}});
  const DualSystem d = dualize(A, m({{"1", "t"}}));
  for (double t : {0.0, 0.3, 2.0}) {
    EXPECT_EQ(d.A_dual.eval(t), Eigen::MatrixXd(-A.eval(t).transpose()));
  }
}

TEST(Dualize, RejectsBadShapes) {
  EXPECT_THROW(dualize(m({{"0", "1"}}), m({{"1", "0"}})), DimensionMismatch);
  EXPECT_THROW(dualize(m({{"0"}}), m({{"1", "0"}})), DimensionMismatch);
}

TEST(Dualize, TwiceIsIdentityOnEvaluation) {
  const TvMatrix A = m({{"sin(t)", "t^2", "-1"}, {"exp(-t)", "0", "cos(2*t)"}, {"1", "t", "-t"}});
  const TvMatrix C = m({{"1", "exp(-0.5*t)", "0"}});
  const DualSystem once = dualize(A, C);
  const DualSystem twice = dualize(once.A_dual, transpose(once.B_dual));
  const TvMatrix back = strip_double_negation(twice.A_dual);
  const TvMatrix c_back = transpose(twice.B_dual);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick(0.0, 20.0);
  for (int k = 0; k < 20; ++k) {
    const double t = pick(rng);
    EXPECT_EQ(twice.A_dual.eval(t), A.eval(t));
    EXPECT_EQ(back.eval(t), A.eval(t));
    EXPECT_EQ(c_back.eval(t), C.eval(t));
  }
}

TEST(GramianIdentity, DecayClosedForm) {
  const GramianIdentityReport r = check_gramian_identity(m({{"-1"}}), m({{"1"}}), kT, kSigma);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.points, 21 * 16);
  EXPECT_LT(r.max_deviation, 1e-6);
}

TEST(GramianIdentity, Flat) {
  const GramianIdentityReport r = check_gramian_identity(m({{"0"}}), m({{"1"}}), kT, kSigma);
  EXPECT_TRUE(r.passed);
}

TEST(GramianIdentity, NilpotentHandIntegral) {
  const TvMatrix A = m({{"0", "1"}, {"0", "0"}});
  const TvMatrix C = m({{"1", "0"}});
  const std::vector<double> t{0.0};
  const std::vector<double> s{1.0};
  EXPECT_TRUE(check_gramian_identity(A, C, t, s).passed);
  const DualSystem d = dualize(A, C);
  Eigen::Matrix2d expected;
  expected << 1.0, 0.5, 0.5, 1.0 / 3.0;
  EXPECT_LT((ctrl_gramian(d.A_dual, d.B_dual, 0.0, 1.0).matrix - expected).cwiseAbs().maxCoeff(),
            1e-9);
  EXPECT_LT((obs_gramian(A, C, 0.0, 1.0).matrix - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(GramianIdentity, NonNormalTimeVarying) {
  const TvMatrix A = m({{"-1", "5*sin(t)"}, {"0", "-0.5"}});
  const TvMatrix C = m({{"0", "1"}, {"exp(-0.1*t)", "0"}});
  EXPECT_TRUE(check_gramian_identity(A, C, grid(0, 10, 11), grid(0.5, 4, 8)).passed);
}

TEST(DualityTheorem, DecayBothCertifyWithZeroRates) {
  const DualityReport r = check_duality_theorem(m({{"-1"}}), m({{"1"}}), kT, kSigma);
  EXPECT_TRUE(r.primal.certified);
  EXPECT_TRUE(r.dual.certified);
  EXPECT_TRUE(r.verdicts_agree);
  EXPECT_LE(r.nu0, 1e-3);
  EXPECT_LE(r.nu1, 1e-3);
  EXPECT_LE(r.mu0, 1e-3);
  EXPECT_LE(r.mu1, 1e-3);
  EXPECT_TRUE(r.rates_match);
  EXPECT_EQ(r.dual_bound_violations, 0);
}

TEST(DualityTheorem, ZeroOutputBothFail) {
  const DualityReport r = check_duality_theorem(m({{"0"}}), m({{"0"}}), kT, kSigma);
  EXPECT_FALSE(r.primal.certified);
  EXPECT_FALSE(r.dual.certified);
  EXPECT_EQ(r.primal.status, "NotObservableOnGrid");
  EXPECT_EQ(r.dual.status, "NotControllableOnGrid");
  EXPECT_TRUE(r.verdicts_agree);
}

TEST(DualityTheorem, DecayingOutputDualBound) {
  const DualityReport r =
      check_duality_theorem(m({{"-0.5"}}), m({{"exp(-0.2*t)"}}), grid(0, 10, 11), kSigma);
  EXPECT_TRUE(r.primal.certified);
  EXPECT_TRUE(r.dual.certified);
  EXPECT_TRUE(r.rates_match);
  EXPECT_GT(r.dual_bound_pairs, 0);
  EXPECT_EQ(r.dual_bound_violations, 0);
  EXPECT_LE(r.max_dual_bound_ratio, 1.0 + 1e-7);
}

}  // namespace
}  // namespace ltv
