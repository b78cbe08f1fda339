#include "ltvobs/criteria.hpp"

#include <gtest/gtest.h>

#include "ltvobs/error.hpp"

namespace ltv {
namespace {

TEST(LtiObsRank, DoubleIntegratorIsObservable) {
  Eigen::Matrix2d a;
  a << 0, 1, 0, 0;
  const RankReport r = lti_obs_rank(a, Eigen::RowVector2d(1, 0));
  EXPECT_EQ(r.rank, 2);
  EXPECT_TRUE(r.observable);
  EXPECT_EQ(r.matrix_rows, 2);
  EXPECT_FALSE(r.tested_at.has_value());
}

TEST(LtiObsRank, IdentityPlantIsNot) {
  const RankReport r = lti_obs_rank(Eigen::Matrix2d::Identity(), Eigen::RowVector2d(1, 0));
  EXPECT_EQ(r.rank, 1);
  EXPECT_FALSE(r.observable);
}

TEST(LtiObsRank, ZeroOutput) {
  const RankReport r = lti_obs_rank(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1));
  EXPECT_EQ(r.rank, 0);
  EXPECT_FALSE(r.observable);
  EXPECT_THROW(lti_obs_rank(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(1, 3)), DimensionMismatch);
}

TEST(LtvLRank, ConstantSystemMatchesLtiStack) {
  const TvMatrix a = TvMatrix::parse({{"-1", "4"}, {"0", "-0.5"}});
  const TvMatrix c = TvMatrix::parse({{"1", "0"}});
  const Eigen::MatrixXd stack = ltv_L_stack(a, c, 1, 2.0, 1e-5);
  EXPECT_NEAR(stack(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(stack(1, 0), -1.0, 1e-8);
  EXPECT_NEAR(stack(1, 1), 4.0, 1e-8);
  EXPECT_EQ(ltv_L_rank(a, c, 1, 2.0).rank, lti_obs_rank(a.eval(0), c.eval(0)).rank);
}

TEST(LtvLRank, TimeVaryingOutput) {
  const RankReport r = ltv_L_rank(TvMatrix::parse({{"0"}}), TvMatrix::parse({{"t"}}), 1, 0.0);
  const Eigen::MatrixXd stack = ltv_L_stack(TvMatrix::parse({{"0"}}), TvMatrix::parse({{"t"}}), 1, 0.0, 1e-5);
  EXPECT_NEAR(stack(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(stack(1, 0), 1.0, 1e-9);
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(*r.tested_at, 0.0);
}

TEST(LtvLRank, DoubleIntegrator) {
  for (double ta : {0.0, 3.5}) {
    EXPECT_EQ(ltv_L_rank(TvMatrix::parse({{"0", "1"}, {"0", "0"}}), TvMatrix::parse({{"1", "0"}}), 1, ta).rank, 2);
  }
}

TEST(LtvLRank, NonFiniteDerivative) {
  EXPECT_THROW(ltv_L_rank(TvMatrix::parse({{"0"}}), TvMatrix::parse({{"ln(t)"}}), 1, 0.0), EvalError);
}

TEST(ObservableAt, Examples) {
  const ObservabilityWitness flat = observable_at(TvMatrix::parse({{"0"}}), TvMatrix::parse({{"1"}}), 0.0, 1.0);
  EXPECT_TRUE(flat.observable);
  EXPECT_NEAR(flat.gramian.lambda_min, 1.0, 1e-10);
  const ObservabilityWitness blind = observable_at(TvMatrix::parse({{"0"}}), TvMatrix::parse({{"0"}}), 0.0, 1.0);
  EXPECT_FALSE(blind.observable);
  EXPECT_EQ(blind.gramian.matrix(0, 0), 0.0);
  EXPECT_TRUE(
      observable_at(TvMatrix::parse({{"0", "1"}, {"0", "0"}}), TvMatrix::parse({{"1", "0"}}), 0.0, 1.0).observable);
  EXPECT_THROW(observable_at(TvMatrix::parse({{"0"}}), TvMatrix::parse({{"1"}}), 1.0, 1.0), ConfigError);
}

TEST(CriteriaProperties, LtiVerdictsAgreeWithGramian) {
  const std::vector<std::pair<std::vector<std::vector<std::string>>, std::vector<std::vector<std::string>>>> cases = {
      {{{"0"}}, {{"1"}}},
      {{{"-1"}}, {{"1"}}},
      {{{"0", "1"}, {"0", "0"}}, {{"1", "0"}}},
      {{{"1", "0"}, {"0", "1"}}, {{"1", "0"}}},
      {{{"-1", "4"}, {"0", "-0.5"}}, {{"1", "0"}}},
      {{{"-1", "4"}, {"0", "-0.5"}}, {{"0", "1"}}},
  };
  for (const auto& [arows, crows] : cases) {
    const TvMatrix a = TvMatrix::parse(arows);
    const TvMatrix c = TvMatrix::parse(crows);
    EXPECT_EQ(lti_obs_rank(a.eval(0), c.eval(0)).observable, observable_at(a, c, 0.0, 1.0).observable);
  }
}

TEST(CriteriaProperties, LTestIsSufficient) {
  const std::vector<std::pair<std::vector<std::vector<std::string>>, std::vector<std::vector<std::string>>>> cases = {
      {{{"0"}}, {{"t"}}},
      {{{"0", "1"}, {"-t", "0"}}, {{"1", "0"}}},
      {{{"sin(t)", "1"}, {"0", "-1"}}, {{"1", "t"}}},
  };
  for (const auto& [arows, crows] : cases) {
    const TvMatrix a = TvMatrix::parse(arows);
    const TvMatrix c = TvMatrix::parse(crows);
    for (double ta : {0.0, 1.0, 2.5}) {
      if (ltv_L_rank(a, c, a.rows() - 1 + 1, ta).observable) {
        EXPECT_TRUE(observable_at(a, c, ta, ta + 1.0).observable);
      }
    }
  }
}

}  // namespace
}  // namespace ltv
