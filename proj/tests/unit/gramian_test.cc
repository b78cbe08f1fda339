#include "ltvobs/gramian.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ltvobs/error.hpp"
#include "ltvobs/flow.hpp"
#include "oracles.hpp"

namespace ltv {
namespace {

TvMatrix m(const std::vector<std::vector<std::string>>& rows) { return TvMatrix::parse(rows); }

const double kHalfOneMinusE2 = (1.0 - std::exp(-2.0)) / 2.0;  // 0.4323324

TEST(ObsGramian, FlatSystem) {
  EXPECT_NEAR(obs_gramian(m({{"0"}}), m({{"1"}}), 0.0, 2.0).matrix(0, 0), 2.0, 1e-10);
}

TEST(ObsGramian, DecayingPlantIsTimeInvariant) {
  EXPECT_NEAR(obs_gramian(m({{"-1"}}), m({{"1"}}), 5.0, 1.0).matrix(0, 0), kHalfOneMinusE2, 1e-9);
  EXPECT_NEAR(obs_gramian(m({{"-1"}}), m({{"1"}}), 0.0, 1.0).matrix(0, 0), kHalfOneMinusE2, 1e-9);
}

TEST(ObsGramian, DecayingOutputMap) {
  EXPECT_NEAR(obs_gramian(m({{"0"}}), m({{"exp(-t)"}}), 0.0, 1.0).matrix(0, 0), kHalfOneMinusE2, 1e-9);
}

TEST(CtrlGramian, Examples) {
  EXPECT_NEAR(ctrl_gramian(m({{"0"}}), m({{"1"}}), 0.0, 3.0).matrix(0, 0), 3.0, 1e-10);
  EXPECT_NEAR(ctrl_gramian(m({{"1"}}), m({{"1"}}), 0.0, 1.0).matrix(0, 0), kHalfOneMinusE2, 1e-9);
  const GramianResult w = ctrl_gramian(m({{"0", "1"}, {"0", "0"}}), m({{"0"}, {"1"}}), 0.0, 1.0);
  Eigen::Matrix2d expected;
  expected << 1.0 / 3, -0.5, -0.5, 1.0;
  EXPECT_LE((w.matrix - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TransportedGramian, Examples) {
  const TvMatrix b = m({{"1"}, {"t"}});
  const TvMatrix zero = m({{"0", "0"}, {"0", "0"}});
  EXPECT_LE((transported_gramian(zero, b, 1.0, 2.0).matrix - ctrl_gramian(zero, b, 1.0, 2.0).matrix)
                .cwiseAbs()
                .maxCoeff(),
            1e-9);
  EXPECT_NEAR(transported_gramian(m({{"1"}}), m({{"1"}}), 0.0, 1.0).matrix(0, 0),
              (std::exp(2.0) - 1.0) / 2.0, 1e-8);
  EXPECT_NEAR(transported_gramian(m({{"-1"}}), m({{"1"}}), 0.0, 1.0).matrix(0, 0), kHalfOneMinusE2, 1e-9);
}

TEST(GramianResult, InvariantsHold) {
  const TvMatrix a = m({{"-1", "4"}, {"0", "-0.5"}});
  const TvMatrix c = m({{"1", "0"}});
  const GramianResult g = obs_gramian(a, c, 1.0, 3.0);
  EXPECT_LE((g.matrix - g.matrix.transpose()).cwiseAbs().maxCoeff(),
            1e-10 * (1.0 + g.matrix.cwiseAbs().maxCoeff()));
  EXPECT_TRUE(g.is_psd());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix);
  EXPECT_NEAR(g.lambda_min, es.eigenvalues()(0), 1e-9 * std::fabs(g.lambda_max));
  EXPECT_NEAR(g.lambda_max, es.eigenvalues()(1), 1e-9 * std::fabs(g.lambda_max));
  EXPECT_GE(g.quad_error_estimate, 0.0);
}

TEST(GramianSeries, MatchesSingleCalls) {
  const TvMatrix a = m({{"sin(ln(t+1))+cos(ln(t+1))"}});
  const TvMatrix c = m({{"1"}});
  const double sigmas[] = {0.5, 1.0, 4.0};
  const auto series = obs_gramian_series(a, c, 2.0, sigmas);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(series[k].matrix(0, 0), obs_gramian(a, c, 2.0, sigmas[k]).matrix(0, 0),
                1e-8 * series[k].matrix(0, 0));
  }
  const double bad[] = {1.0, 0.5};
  EXPECT_THROW(obs_gramian_series(a, c, 0.0, bad), ConfigError);
  EXPECT_THROW(obs_gramian(a, m({{"1", "0"}}), 0.0, 1.0), DimensionMismatch);
}

const std::vector<std::pair<std::vector<std::vector<std::string>>, std::vector<std::vector<std::string>>>>
    kSystems = {
        {{{"0"}}, {{"1"}}},
        {{{"-1"}}, {{"1"}}},
        {{{"-0.5"}}, {{"exp(-0.2*t)"}}},
        {{{"sin(ln(t+1))+cos(ln(t+1))"}}, {{"1"}}},
        {{{"0", "1"}, {"0", "0"}}, {{"1", "0"}}},
        {{{"-1", "4"}, {"0", "-0.5"}}, {{"1", "0"}}},
};

TEST(GramianProperties, Additivity) {
  for (const auto& [arows, crows] : kSystems) {
    const TvMatrix a = m(arows);
    const TvMatrix c = m(crows);
    const double t = 1.5, s1 = 0.8, s2 = 2.1;
    const Eigen::MatrixXd whole = obs_gramian(a, c, t, s1 + s2).matrix;
    const Eigen::MatrixXd phi = transition(a, t + s1, t);
    const Eigen::MatrixXd split =
        obs_gramian(a, c, t, s1).matrix + phi.transpose() * obs_gramian(a, c, t + s1, s2).matrix * phi;
    EXPECT_LE(testing::rel_diff(split, whole), 1e-6);
  }
}

TEST(GramianProperties, MonotoneInSigma) {
  for (const auto& [arows, crows] : kSystems) {
    const TvMatrix a = m(arows);
    const TvMatrix c = m(crows);
    const double sigmas[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    const auto series = obs_gramian_series(a, c, 0.5, sigmas);
    for (std::size_t k = 1; k < series.size(); ++k) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(series[k].matrix - series[k - 1].matrix);
      EXPECT_GE(es.eigenvalues()(0), -1e-8);
    }
  }
}

TEST(GramianProperties, SimpsonCrossCheck) {
  for (const auto& [arows, crows] : kSystems) {
    const TvMatrix a = m(arows);
    const TvMatrix c = m(crows);
    for (auto [t, sigma] : {std::pair{0.0, 1.0}, {3.0, 4.0}}) {
      EXPECT_LE(testing::rel_diff(obs_gramian(a, c, t, sigma).matrix, testing::simpson_obs_gramian(a, c, t, sigma)),
                1e-6);
      const TvMatrix b = transpose(c);
      EXPECT_LE(testing::rel_diff(ctrl_gramian(a, b, t, sigma).matrix, testing::simpson_ctrl_gramian(a, b, t, sigma)),
                1e-6);
    }
  }
}

TEST(GramianKind, Names) {
  EXPECT_EQ(parse_gramian_kind("K"), GramianKind::Transported);
  EXPECT_EQ(to_string(GramianKind::Observability), "M");
  EXPECT_THROW(parse_gramian_kind("X"), ConfigError);
}

}  // namespace
}  // namespace ltv
