#include "ltvobs/scenario.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "ltvobs/error.hpp"
#include "ltvobs/flow.hpp"
#include "ltvobs/gramian.hpp"
#include "oracles.hpp"

namespace ltv {
namespace {

TEST(Scenario, EveryNameBuilds) {
  for (const std::string& name : scenario_names()) {
    const Scenario s = make_scenario(name);
    EXPECT_EQ(s.name, name);
    EXPECT_FALSE(s.runs.empty());
    EXPECT_FALSE(s.expected.source.empty()) << name;
    EXPECT_LE(s.system.n, 4);
  }
  EXPECT_THROW(make_scenario("nope"), ConfigError);
}

TEST(Scenario, DescribeCarriesSource) {
  for (const std::string& name : scenario_names()) {
    const auto j = describe(make_scenario(name));
    EXPECT_TRUE(j.at("expected").contains("source")) << name;
  }
}

TEST(Scenario, EveryDefaultRunIsClean) {
  for (const std::string& name : scenario_names()) {
    const Scenario s = make_scenario(name);
    for (const std::string& run : s.runs) {
      const RunResult r = run_scenario(s, run);
      EXPECT_EQ(r.status, RunStatus::Ok) << name << " " << run << "\n" << r.report.dump(1);
    }
  }
}

TEST(Scenario, UnknownRun) {
  EXPECT_THROW(run_scenario(make_scenario("flat"), "plot"), ConfigError);
}

TEST(Sec32, ParameterValidation) {
  EXPECT_THROW(scenario_sec32({2.0, 1.0, 0.2, 0.2, "-0.5"}), ConfigError);
  EXPECT_THROW(scenario_sec32({1.0, 1.0, -0.1, 0.2, "-0.5"}), ConfigError);
  EXPECT_THROW(scenario_sec32({0.0, 1.0, 0.2, 0.2, "-0.5"}), ConfigError);
}

TEST(Sec32, OutputSitsInSandwich) {
  const Sec32Params p{0.5, 2.0, 0.3, 0.1, "-0.5"};
  const Scenario s = scenario_sec32(p);
  for (double t : {0.0, 1.0, 7.5, 20.0}) {
    const double ctc = s.system.C->eval(t).squaredNorm();
    EXPECT_GE(ctc, p.c0 * std::exp(-2 * p.gamma0 * t) * (1 - 1e-12));
    EXPECT_LE(ctc, p.c1 * std::exp(2 * p.gamma1 * t));
  }
}

TEST(Sec32, FlatPlantReducesToSigma) {
  // A = 0, C = 1: K0 = 1, eps = 0, and the predicted bounds bracket M = sigma.
  const Sec32Params p{1.0, 1.0, 0.0, 0.0, "0"};
  const Scenario s = scenario_sec32(p);
  const std::vector<double> t{0.0, 5.0};
  const std::vector<double> sigma{0.5, 1.0, 4.0};
  const GramianTable table = obs_table(s.system.A, *s.system.C, t, sigma);
  GrowthEnvelope env;
  env.K0 = 1.0;
  env.a = 1e-6;
  env.eps = 0.0;
  const Sec32Check c = check_sec32(p, table, env);
  EXPECT_EQ(c.lower_violations, 0);
  EXPECT_EQ(c.upper_violations, 0);
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    EXPECT_LE(c.theta0[j], sigma[j]);
    EXPECT_GE(c.theta1[j], sigma[j]);
    EXPECT_NEAR(c.theta0[j], sigma[j], 1e-5 * sigma[j] * sigma[j] + 1e-12);
  }
}

TEST(Sec32, DecayingOutputAgainstQuadrature) {
  const Scenario s = make_scenario("sec32");
  const std::vector<double> t{0.0, 3.0, 10.0};
  const std::vector<double> sigma{0.25, 2.0, 8.0};
  const GramianTable table = obs_table(s.system.A, *s.system.C, t, sigma);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      const double oracle = testing::gauss_legendre(
          [&](double u) { return std::exp(-(u - t[i])) * std::exp(-0.4 * u); }, t[i], t[i] + sigma[j]);
      EXPECT_NEAR(table.lambda_min(i, j), oracle, 1e-9 * oracle);
    }
  }
  const RunResult r = run_scenario(s, "certify");
  const auto& pb = r.report.at("predicted_bounds");
  EXPECT_EQ(pb.at("lower_violations"), 0);
  EXPECT_EQ(pb.at("upper_violations"), 0);
  EXPECT_LE(r.report.at("nuco").at("nu0").get<double>(), pb.at("nu0_limit").get<double>());
}

TEST(RunStatus, ExitCodes) {
  EXPECT_EQ(exit_code(RunStatus::Ok), 0);
  EXPECT_EQ(exit_code(RunStatus::HypothesisUnmet), 2);
  EXPECT_EQ(exit_code(RunStatus::Failed), 3);
  EXPECT_EQ(worse(RunStatus::Ok, RunStatus::Failed), RunStatus::Failed);
  EXPECT_EQ(worse(RunStatus::HypothesisUnmet, RunStatus::Ok), RunStatus::HypothesisUnmet);
}

TEST(RunAll, Deterministic) {
  const RunResult a = run_all_scenarios();
  const RunResult b = run_all_scenarios();
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.status, RunStatus::Ok);
}

}  // namespace
}  // namespace ltv
