#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltvobs/envelope.hpp"
#include "ltvobs/nucert.hpp"
#include "ltvobs/ode.hpp"
#include "ltvobs/system_config.hpp"

namespace ltv {

/// Parameters of the decaying-output construction
///   c0 e^{-2 gamma0 t} I <= C^T C <= c1 e^{2 gamma1 t} I.
struct Sec32Params {
  double c0 = 1.0;
  double c1 = 1.0;
  double gamma0 = 0.2;
  double gamma1 = 0.2;
  std::string plant = "-0.5";  // scalar plant expression
};

/// What a built-in scenario is expected to produce. `source` says where the
/// expectation comes from: "closed form", "explicit bound" or "structural".
struct Expectation {
  std::string source;
  std::optional<bool> nuco_certified;
  std::optional<bool> nucc_certified;
  std::optional<bool> uniform;
  std::optional<double> max_rate;  // nu0 and nu1 at most this
  std::string theta0_formula;      // in sigma
  std::function<double(double)> theta0;
  std::optional<std::string> phi_case;
};

nlohmann::json to_json(const Expectation& e);

struct Scenario {
  std::string name;
  std::string description;
  SystemConfig system;
  std::optional<TvMatrix> gain;  // F (K = B F) for "output", L for "input"
  std::string gain_mode;
  std::vector<double> t_grid;
  std::vector<double> sigma_grid;
  std::vector<std::string> runs;  // what `--all` executes
  Expectation expected;
  std::optional<Sec32Params> sec32;
};

std::vector<std::string> scenario_names();

/// Throws ConfigError for an unknown name.
Scenario make_scenario(const std::string& name);

/// Throws ConfigError unless 0 < c0 <= c1 and both rates are >= 0.
Scenario scenario_sec32(const Sec32Params& p);

/// Predicted bounds for the decaying-output construction, evaluated with the
/// plant's fitted (K0, a, eps):
///   theta0(sigma) = c0^2 (1 - e^{-2 (a + gamma0) sigma}) / (2 K0^2 (a + gamma0))
///   theta1(sigma) = K0^2 c1^2 (e^{2 (a + eps + gamma1) sigma} - 1) / (2 (a + eps + gamma1))
/// with lambda_min(M) >= theta0 e^{-2 (eps + gamma0) t} and
/// lambda_max(M) <= theta1 e^{2 (eps + gamma1) t} checked at every grid point.
struct Sec32Check {
  GrowthEnvelope envelope;
  std::vector<double> theta0;
  std::vector<double> theta1;
  double lower_rate = 0.0;  // eps + gamma0
  double upper_rate = 0.0;  // eps + gamma1
  int points = 0;
  int lower_violations = 0;
  int upper_violations = 0;
  double max_lower_ratio = 0.0;  // bound / lambda_min
  double max_upper_ratio = 0.0;  // lambda_max / bound
};

Sec32Check check_sec32(const Sec32Params& p, const GramianTable& table, const GrowthEnvelope& env);

nlohmann::json to_json(const Sec32Check& c);

struct RunOptions {
  IntegratorConfig cfg;
  std::uint64_t seed = 20240501;
  double pd_tol = kDefaultPdTol;
  std::optional<std::vector<double>> t_grid;  // override the scenario's grids
  std::optional<std::vector<double>> sigma_grid;
};

enum class RunStatus { Ok, HypothesisUnmet, Failed };

std::string to_string(RunStatus s);

// Exit-code contract: 0, 2, 3.
int exit_code(RunStatus s);

RunStatus worse(RunStatus a, RunStatus b);

struct RunResult {
  RunStatus status = RunStatus::Ok;
  nlohmann::json report;
};

/// `run` is one of "certify", "dual", "twothird", "feedback". The report
/// always carries "status" and, where the scenario has expectations,
/// "matches_expected".
RunResult run_scenario(const Scenario& s, const std::string& run, const RunOptions& opts = {});

/// Every default run of every scenario, in list order.
RunResult run_all_scenarios(const RunOptions& opts = {});

/// The scenario's description, system, grids and expectations.
nlohmann::json describe(const Scenario& s);

}  // namespace ltv
