#include "ltvobs/flow.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ltvobs/linalg.hpp"
#include "oracles.hpp"

namespace ltv {
namespace {

TvMatrix scalar(const std::string& a) { return TvMatrix::parse({{a}}); }

TEST(Transition, ZeroGenerator) {
  EXPECT_NEAR(transition(scalar("0"), 3.0, -2.0)(0, 0), 1.0, 1e-14);
}

TEST(Transition, ConstantDecay) {
  EXPECT_NEAR(transition(scalar("-1"), 1.0, 0.0)(0, 0), 0.3678794411714423, 1e-9);
}

TEST(Transition, LinearGenerator) {
  EXPECT_NEAR(transition(scalar("t"), 1.0, 0.0)(0, 0), 1.6487212707001282, 1e-9);
}

TEST(Transition, IdentityAtBasePoint) {
  const TvMatrix a = TvMatrix::parse({{"sin(t)", "1"}, {"-1", "cos(t)"}});
  EXPECT_LE(max_norm(transition(a, 2.5, 2.5) - Eigen::Matrix2d::Identity()), 1e-10);
}

TEST(TransitionDual, Examples) {
  EXPECT_NEAR(transition_dual(scalar("0"), 1.0, 4.0)(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(transition_dual(scalar("-1"), 0.0, 1.0)(0, 0), std::exp(-1.0), 1e-9);
  const Eigen::MatrixXd psi = transition_dual(TvMatrix::parse({{"0", "1"}, {"0", "0"}}), 1.0, 0.0);
  Eigen::Matrix2d expected;
  expected << 1, 0, -1, 1;
  EXPECT_LE(max_norm(psi - expected), 1e-10);
}

const std::vector<std::vector<std::vector<std::string>>> kPlants = {
    {{"-1"}},
    {{"t"}},
    {{"sin(ln(t+1))+cos(ln(t+1))"}},
    {{"0", "1"}, {"0", "0"}},
    {{"-1", "4"}, {"0", "-0.5"}},
    {{"-0.2*t", "1"}, {"-1", "sin(t)"}},
};

TEST(TransitionProperties, Cocycle) {
  const double grid[] = {0.0, 0.7, 1.9, 3.1, 4.0};
  for (const auto& rows : kPlants) {
    const TvMatrix a = TvMatrix::parse(rows);
    for (double r : grid) {
      for (double s : grid) {
        for (double t : grid) {
          const Eigen::MatrixXd direct = transition(a, t, r);
          const Eigen::MatrixXd composed = transition(a, t, s) * transition(a, s, r);
          EXPECT_LE(max_norm(composed - direct), 1e-6 * (1.0 + max_norm(direct)));
        }
      }
    }
  }
}

TEST(TransitionProperties, BackwardDecayKeepsRelativeAccuracy) {
  const TvMatrix a = TvMatrix::parse({{"t"}});
  const double back = transition(a, 0.0, 10.0)(0, 0);
  EXPECT_NEAR(back / std::exp(-50.0), 1.0, 1e-8);
  EXPECT_NEAR(back * transition(a, 10.0, 0.0)(0, 0), 1.0, 1e-8);
  EXPECT_NEAR(transition_dual(a, 10.0, 0.0)(0, 0) / std::exp(-50.0), 1.0, 1e-8);
}

TEST(TransitionProperties, DualIdentity) {
  for (const auto& rows : kPlants) {
    const TvMatrix a = TvMatrix::parse(rows);
    for (auto [t, tau] : {std::pair{0.0, 2.0}, {3.0, 0.5}, {1.0, 1.0}}) {
      const Eigen::MatrixXd phi = transition(a, tau, t);
      EXPECT_LE(max_norm(transition_dual(a, t, tau) - phi.transpose()), 1e-6 * (1.0 + max_norm(phi)));
    }
  }
}

TEST(TransitionProperties, ScalarOracle) {
  const std::vector<std::pair<std::string, std::function<double(double)>>> cases = {
      {"sin(ln(t+1))+cos(ln(t+1))", [](double s) { return std::sin(std::log(s + 1)) + std::cos(std::log(s + 1)); }},
      {"-exp(-0.9*t)", [](double s) { return -std::exp(-0.9 * s); }},
      {"0.3*t - 1", [](double s) { return 0.3 * s - 1; }},
  };
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (const auto& [src, fn] : cases) {
    for (int k = 0; k < 10; ++k) {
      const double t = dist(rng);
      const double tau = dist(rng);
      const double expected = testing::scalar_transition(fn, t, tau);
      EXPECT_NEAR(transition(scalar(src), t, tau)(0, 0), expected, 1e-7 * std::max(1.0, expected)) << src;
    }
  }
}

TEST(TransitionFrom, MatchesSingleSolves) {
  const TvMatrix a = TvMatrix::parse({{"-1", "4"}, {"0", "-0.5"}});
  const double times[] = {3.0, -1.0, 0.5, 2.0, 1.0};
  const auto phis = transition_from(a, 1.0, times);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_LE(max_norm(phis[k] - transition(a, times[k], 1.0)), 1e-8);
  }
}

TEST(TransitionCache, WarmReadsMatchDirectSolves) {
  const TvMatrix a = TvMatrix::parse({{"sin(ln(t+1))+cos(ln(t+1))"}});
  Transition tr(a);
  const double taus[] = {0.0, 2.0, 5.0};
  tr.warm_up(taus, 0.0, 10.0);
  EXPECT_TRUE(tr.cached(2.0));
  EXPECT_FALSE(tr.cached(1.0));
  for (double tau : taus) {
    for (double t : {0.0, 1.3, 4.4, 9.9}) {
      EXPECT_NEAR(tr(t, tau)(0, 0), transition(a, t, tau)(0, 0), 1e-7 * (1 + std::fabs(tr(t, tau)(0, 0))));
    }
  }
  EXPECT_NEAR(tr(3.0, 1.0)(0, 0), transition(a, 3.0, 1.0)(0, 0), 1e-12);
}

}  // namespace
}  // namespace ltv
