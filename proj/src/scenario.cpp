#include "ltvobs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ltvobs/dual.hpp"
#include "ltvobs/error.hpp"
#include "ltvobs/feedback.hpp"
#include "ltvobs/report.hpp"

namespace ltv {

using nlohmann::json;

namespace {

using Rows = std::vector<std::vector<std::string>>;

constexpr double kThetaTol = 1e-6;
constexpr double kRateMargin = 0.05;

SystemConfig make_system(const Rows& A, const std::optional<Rows>& B, const std::optional<Rows>& C) {
  json j;
  j["A"] = A;
  if (B) j["B"] = *B;
  if (C) j["C"] = *C;
  return system_from_json(j);
}

const std::vector<double> kPlantT = TimeGrid(0, 20, 21).points();
const std::vector<double> kPlantSigma = TimeGrid(0.25, 8, 16).points();
// Decaying outputs and inputs shrink the Gramians like e^{-2t}; a shorter
// horizon keeps them above the positive-definiteness floor.
const std::vector<double> kLoopT = TimeGrid(0, 5, 11).points();
const std::vector<double> kLoopSigma = TimeGrid(0.25, 4, 16).points();

Scenario plant_scenario(std::string name, std::string description, const Rows& A, const Rows& B,
                        const Rows& C) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.system = make_system(A, B, C);
  s.t_grid = kPlantT;
  s.sigma_grid = kPlantSigma;
  s.runs = {"certify", "dual", "twothird"};
  return s;
}

Scenario loop_scenario(std::string name, std::string description, const Rows& A, const Rows& B,
                       const std::optional<Rows>& C, const Rows& gain, std::string mode) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.system = make_system(A, B, C);
  s.gain = TvMatrix::parse(gain);
  s.gain_mode = std::move(mode);
  s.t_grid = kLoopT;
  s.sigma_grid = kLoopSigma;
  s.runs = {"feedback"};
  return s;
}

// lambda_min of [[s, s^2/2], [s^2/2, s^3/3]], the double-integrator Gramian.
double nilpotent_lambda_min(double s) {
  const double tr = s + s * s * s / 3.0;
  const double det = s * s * s * s / 12.0;
  const double lmax = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
  return det / lmax;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

json error_json(const Error& e) { return {{"error", e.code()}, {"message", e.what()}}; }

struct Grids {
  std::vector<double> t;
  std::vector<double> sigma;
};

Grids grids_for(const Scenario& s, const RunOptions& opts) {
  return {opts.t_grid ? *opts.t_grid : s.t_grid, opts.sigma_grid ? *opts.sigma_grid : s.sigma_grid};
}

RunResult run_certify(const Scenario& s, const RunOptions& opts) {
  const Grids g = grids_for(s, opts);
  const Expectation& ex = s.expected;
  json rep;
  bool matches = true;

  if (s.system.C) {
    bool certified = false;
    try {
      const NucoCertificate cert =
          certify_nuco(s.system.A, *s.system.C, g.t, g.sigma, opts.cfg, opts.pd_tol);
      certified = cert.verdict == Verdict::CertifiedOnGrid;
      rep["nuco"] = to_json(cert);
      if (ex.uniform && cert.uniform != *ex.uniform) matches = false;
      if (ex.max_rate && (cert.nu0 > *ex.max_rate || cert.nu1 > *ex.max_rate)) matches = false;
      if (ex.theta0) {
        double worst = 0.0;
        for (std::size_t j = 0; j < g.sigma.size(); ++j) {
          if (!std::isfinite(cert.theta0[j])) continue;
          const double want = ex.theta0(g.sigma[j]);
          worst = std::max(worst, std::fabs(cert.theta0[j] - want) / std::fabs(want));
        }
        rep["theta0_check"] = {{"formula", ex.theta0_formula},
                               {"max_rel_error", worst},
                               {"tolerance", kThetaTol}};
        if (!(worst <= kThetaTol)) matches = false;
      }
      if (s.sec32) {
        const auto z = feedback_support(g.t, g.sigma);
        const GrowthEnvelope env = fit_growth_envelope(s.system.A, z, z, opts.cfg);
        const Sec32Check chk = check_sec32(*s.sec32, cert.table, env);
        json pb = to_json(chk);
        pb["nu0_limit"] = chk.lower_rate + kRateMargin;
        rep["predicted_bounds"] = pb;
        if (chk.lower_violations + chk.upper_violations > 0) matches = false;
        if (cert.nu0 > chk.lower_rate + kRateMargin) matches = false;
      }
    } catch (const NotObservableOnGrid& e) {
      rep["nuco"] = error_json(e);
    }
    if (certified != ex.nuco_certified.value_or(true)) matches = false;
  }

  if (s.system.B) {
    bool certified = false;
    try {
      const NuccCertificate cert =
          certify_nucc(s.system.A, *s.system.B, g.t, g.sigma, opts.cfg, opts.pd_tol);
      certified = cert.verdict == Verdict::CertifiedOnGrid;
      rep["nucc"] = to_json(cert);
    } catch (const NotControllableOnGrid& e) {
      rep["nucc"] = error_json(e);
    }
    if (certified != ex.nucc_certified.value_or(true)) matches = false;
  }

  rep["matches_expected"] = matches;
  const RunStatus st = matches ? RunStatus::Ok : RunStatus::Failed;
  rep["status"] = to_string(st);
  return {st, rep};
}

RunResult run_dual(const Scenario& s, const RunOptions& opts) {
  if (!s.system.C) throw ConfigError("scenario '" + s.name + "' has no output map");
  const Grids g = grids_for(s, opts);
  json rep;
  const GramianIdentityReport id = check_gramian_identity(s.system.A, *s.system.C, g.t, g.sigma, opts.cfg);
  rep["identity"] = to_json(id);
  RunStatus st = id.passed ? RunStatus::Ok : RunStatus::Failed;
  try {
    const DualityReport th = check_duality_theorem(s.system.A, *s.system.C, g.t, g.sigma, opts.cfg, opts.pd_tol);
    rep["theorem"] = to_json(th);
    if (!th.verdicts_agree || th.dual_bound_violations > 0) st = RunStatus::Failed;
  } catch (const HypothesisUnmet& e) {
    rep["theorem"] = error_json(e);
    rep["theorem"]["condition"] = e.condition();
    st = worse(st, RunStatus::HypothesisUnmet);
  }
  rep["status"] = to_string(st);
  return {st, rep};
}

RunResult run_twothird(const Scenario& s, const RunOptions& opts) {
  if (!s.system.B) throw ConfigError("scenario '" + s.name + "' has no input map");
  const Grids g = grids_for(s, opts);
  const TwoImplyThirdReport r = check_two_imply_third(s.system.A, *s.system.B, g.t, g.sigma, opts.cfg, opts.pd_tol);
  json rep = to_json(r);
  const RunStatus st = r.findings.empty() ? RunStatus::Ok : RunStatus::Failed;
  rep["status"] = to_string(st);
  return {st, rep};
}

RunResult run_feedback(const Scenario& s, const RunOptions& opts) {
  if (!s.gain || !s.system.B) throw ConfigError("scenario '" + s.name + "' has no feedback gain");
  const Grids g = grids_for(s, opts);
  FeedbackOptions fo;
  fo.seed = opts.seed;
  fo.pd_tol = opts.pd_tol;
  json rep;
  rep["mode"] = s.gain_mode;
  RunStatus st = RunStatus::Ok;
  try {
    if (s.gain_mode == "input") {
      const InputFeedbackReport r =
          verify_input_feedback(s.system.A, *s.system.B, *s.gain, g.t, g.sigma, opts.cfg, fo);
      rep["input"] = to_json(r);
      const bool clean = r.paths_agree && r.dual_back_mismatch == 0.0 &&
                         (!r.dual_path || r.dual_path->violations.empty());
      if (!clean) st = RunStatus::Failed;
    } else {
      if (!s.system.C) throw ConfigError("output feedback needs an output map");
      const TvMatrix K = multiply(*s.system.B, *s.gain);
      const FeedbackCheck c =
          verify_output_injection(s.system.A, K, *s.system.C, g.t, g.sigma, opts.cfg, fo);
      rep["output"] = to_json(c);
      // The closed loop as plant with gain -K closes back to A.
      const TvMatrix closed = close_loop(s.system.A, K, *s.system.C);
      const CertOutcome back =
          nuco_outcome(close_loop(closed, negate(K), *s.system.C), *s.system.C, g.t, g.sigma, opts.cfg,
                       opts.pd_tol);
      const bool swapped_agree = c.closed.certified == back.certified;
      rep["swapped_roles"] = {{"plant", to_json(c.closed)}, {"closed", to_json(back)}, {"verdicts_agree", swapped_agree}};
      bool clean = c.violations.empty() && c.verdicts_agree && swapped_agree;
      if (s.expected.phi_case && to_string(c.phi_case) != *s.expected.phi_case) clean = false;
      if (!clean) st = RunStatus::Failed;
    }
  } catch (const HypothesisUnmet& e) {
    rep["error"] = e.code();
    rep["condition"] = e.condition();
    rep["message"] = e.what();
    st = RunStatus::HypothesisUnmet;
  } catch (const NotObservableOnGrid& e) {
    rep["error"] = e.code();
    rep["message"] = e.what();
    st = RunStatus::Failed;
  }
  rep["status"] = to_string(st);
  return {st, rep};
}

}  // namespace

json to_json(const Expectation& e) {
  json j = {{"source", e.source}};
  if (e.nuco_certified) j["nuco_certified"] = *e.nuco_certified;
  if (e.nucc_certified) j["nucc_certified"] = *e.nucc_certified;
  if (e.uniform) j["uniform"] = *e.uniform;
  if (e.max_rate) j["max_rate"] = *e.max_rate;
  if (!e.theta0_formula.empty()) j["theta0"] = e.theta0_formula;
  if (e.phi_case) j["phi_case"] = *e.phi_case;
  return j;
}

std::vector<std::string> scenario_names() {
  return {"flat",          "decay",           "sec32",           "nilpotent",
          "sinln",         "nonnormal",       "zero_output",     "fb_phi_greater",
          "fb_phi_less",   "fb_rotation",     "fb_zero_gain",    "in_scalar",
          "in_rotation",   "in_zero_gain"};
}

Scenario scenario_sec32(const Sec32Params& p) {
  if (!(p.c0 > 0.0) || p.c0 > p.c1) throw ConfigError("sec32: need 0 < c0 <= c1");
  if (p.gamma0 < 0.0 || p.gamma1 < 0.0) throw ConfigError("sec32: rates must be non-negative");
  // Scalar plant: C = sqrt(c0) e^{-gamma0 t} sits inside the sandwich.
  const std::string c = num(std::sqrt(p.c0)) + "*exp(-" + num(p.gamma0) + "*t)";
  Scenario s = plant_scenario("sec32", "scalar plant with output decaying inside an exponential sandwich",
                              {{p.plant}}, {{c}}, {{c}});
  s.sec32 = p;
  s.expected.source = "explicit bound";
  s.expected.nuco_certified = true;
  s.expected.nucc_certified = true;
  s.expected.theta0_formula =
      "lambda_min >= c0^2 (1 - e^{-2(a+gamma0) sigma}) / (2 K0^2 (a+gamma0)) e^{-2(eps+gamma0) t}";
  return s;
}

Scenario make_scenario(const std::string& name) {
  if (name == "flat") {
    Scenario s = plant_scenario("flat", "A = 0 with unit input and output", {{"0"}}, {{"1"}}, {{"1"}});
    s.expected = {"closed form", true, true, true, kUniformRateTol, "sigma",
                  [](double sigma) { return sigma; }, std::nullopt};
    return s;
  }
  if (name == "decay") {
    Scenario s = plant_scenario("decay", "A = -1 with unit input and output", {{"-1"}}, {{"1"}}, {{"1"}});
    s.expected = {"closed form", true, true, true, kUniformRateTol, "(1 - exp(-2 sigma)) / 2",
                  [](double sigma) { return 0.5 * (1.0 - std::exp(-2.0 * sigma)); }, std::nullopt};
    return s;
  }
  if (name == "sec32") return scenario_sec32({});
  if (name == "nilpotent") {
    Scenario s = plant_scenario("nilpotent", "double integrator observed through its position",
                                {{"0", "1"}, {"0", "0"}}, {{"0"}, {"1"}}, {{"1", "0"}});
    s.expected = {"closed form", true, true, true, kUniformRateTol,
                  "lambda_min [[sigma, sigma^2/2], [sigma^2/2, sigma^3/3]]", nilpotent_lambda_min,
                  std::nullopt};
    return s;
  }
  if (name == "sinln") {
    Scenario s = plant_scenario("sinln", "scalar plant sin(ln(t+1)) + cos(ln(t+1)) with unit maps",
                                {{"sin(ln(t+1)) + cos(ln(t+1))"}}, {{"1"}}, {{"1"}});
    s.expected.source = "structural";
    s.expected.nuco_certified = true;
    s.expected.nucc_certified = true;
    return s;
  }
  if (name == "nonnormal") {
    Scenario s = plant_scenario("nonnormal", "2x2 non-normal plant with time-varying coupling",
                                {{"-1", "5*sin(t)"}, {"0", "-0.5"}}, {{"0"}, {"1"}},
                                {{"0", "1"}, {"exp(-0.1*t)", "0"}});
    s.expected.source = "structural";
    s.expected.nuco_certified = true;
    s.expected.nucc_certified = true;
    return s;
  }
  if (name == "zero_output") {
    Scenario s = plant_scenario("zero_output", "A = 0 with vanishing input and output maps", {{"0"}},
                                {{"0"}}, {{"0"}});
    s.expected.source = "structural";
    s.expected.nuco_certified = false;
    s.expected.nucc_certified = false;
    return s;
  }
  if (name == "fb_phi_greater") {
    Scenario s = loop_scenario("fb_phi_greater", "A = 0, F = e^{0.1t}, C = e^{-t}", {{"0"}}, {{"1"}},
                               Rows{{"exp(-t)"}}, {{"exp(0.1*t)"}}, "output");
    s.expected.source = "closed form";
    s.expected.phi_case = "PhiGreater";
    return s;
  }
  if (name == "fb_phi_less") {
    Scenario s = loop_scenario("fb_phi_less", "A = 0, F = 0.2 e^{0.3t}, C = e^{-1.5t}", {{"0"}}, {{"1"}},
                               Rows{{"exp(-1.5*t)"}}, {{"0.2*exp(0.3*t)"}}, "output");
    s.expected.source = "closed form";
    s.expected.phi_case = "PhiLess";
    return s;
  }
  if (name == "fb_rotation") {
    Scenario s = loop_scenario("fb_rotation", "rotation plant, F = 0.1 e^{0.2t}, C = [e^{-t}, 0]",
                               {{"0", "1"}, {"-1", "0"}}, {{"1"}, {"0"}}, Rows{{"exp(-t)", "0"}},
                               {{"0.1*exp(0.2*t)"}}, "output");
    s.expected.source = "structural";
    s.expected.phi_case = "PhiLess";
    return s;
  }
  if (name == "fb_zero_gain") {
    Scenario s = loop_scenario("fb_zero_gain", "rotation plant with F = 0", {{"0", "1"}, {"-1", "0"}},
                               {{"1"}, {"0"}}, Rows{{"exp(-t)", "0"}}, {{"0"}}, "output");
    s.expected.source = "structural";
    s.expected.phi_case = "PhiLess";
    return s;
  }
  if (name == "in_scalar") {
    Scenario s = loop_scenario("in_scalar", "A = 0, B = e^{-t}, L = e^{0.1t}", {{"0"}}, {{"exp(-t)"}},
                               std::nullopt, {{"exp(0.1*t)"}}, "input");
    s.expected.source = "closed form";
    return s;
  }
  if (name == "in_rotation") {
    Scenario s = loop_scenario("in_rotation", "rotation plant, B = [0; e^{-t}], L = [0.1 e^{0.2t}, 0]",
                               {{"0", "1"}, {"-1", "0"}}, {{"0"}, {"exp(-t)"}}, std::nullopt,
                               {{"0.1*exp(0.2*t)", "0"}}, "input");
    s.expected.source = "structural";
    return s;
  }
  if (name == "in_zero_gain") {
    Scenario s = loop_scenario("in_zero_gain", "rotation plant, B = [0; e^{-t}], L = 0",
                               {{"0", "1"}, {"-1", "0"}}, {{"0"}, {"exp(-t)"}}, std::nullopt,
                               {{"0", "0"}}, "input");
    s.expected.source = "structural";
    return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

Sec32Check check_sec32(const Sec32Params& p, const GramianTable& table, const GrowthEnvelope& env) {
  Sec32Check c;
  c.envelope = env;
  const double K0 = env.K0;
  const double lo = env.a + p.gamma0;
  const double hi = env.a + env.eps + p.gamma1;
  for (double s : table.sigma_grid) {
    c.theta0.push_back(p.c0 * p.c0 * (1.0 - std::exp(-2.0 * lo * s)) / (2.0 * K0 * K0 * lo));
    c.theta1.push_back(K0 * K0 * p.c1 * p.c1 * std::expm1(2.0 * hi * s) / (2.0 * hi));
  }
  c.lower_rate = env.eps + p.gamma0;
  c.upper_rate = env.eps + p.gamma1;
  for (std::size_t i = 0; i < table.t_grid.size(); ++i) {
    const double t = table.t_grid[i];
    for (std::size_t j = 0; j < table.sigma_grid.size(); ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const double lower = c.theta0[j] * std::exp(-2.0 * c.lower_rate * t);
      const double upper = c.theta1[j] * std::exp(2.0 * c.upper_rate * t);
      const double lmin = table.lambda_min(ii, jj);
      const double lmax = table.lambda_max(ii, jj);
      ++c.points;
      if (lmin < lower - kCertSlack * (1.0 + lower)) ++c.lower_violations;
      if (lmax > upper + kCertSlack * (1.0 + upper)) ++c.upper_violations;
      if (lmin > 0.0) c.max_lower_ratio = std::max(c.max_lower_ratio, lower / lmin);
      c.max_upper_ratio = std::max(c.max_upper_ratio, lmax / upper);
    }
  }
  return c;
}

json to_json(const Sec32Check& c) {
  return {{"envelope", to_json(c.envelope)},
          {"theta0", c.theta0},
          {"theta1", c.theta1},
          {"lower_rate", c.lower_rate},
          {"upper_rate", c.upper_rate},
          {"points", c.points},
          {"lower_violations", c.lower_violations},
          {"upper_violations", c.upper_violations},
          {"max_lower_ratio", c.max_lower_ratio},
          {"max_upper_ratio", c.max_upper_ratio}};
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::HypothesisUnmet:
      return "hypothesis_unmet";
    case RunStatus::Failed:
      return "failed";
  }
  return "failed";
}

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::Ok:
      return 0;
    case RunStatus::HypothesisUnmet:
      return 2;
    case RunStatus::Failed:
      return 3;
  }
  return 3;
}

RunStatus worse(RunStatus a, RunStatus b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

RunResult run_scenario(const Scenario& s, const std::string& run, const RunOptions& opts) {
  if (run == "certify") return run_certify(s, opts);
  if (run == "dual") return run_dual(s, opts);
  if (run == "twothird") return run_twothird(s, opts);
  if (run == "feedback") return run_feedback(s, opts);
  throw ConfigError("unknown scenario run '" + run + "'");
}

RunResult run_all_scenarios(const RunOptions& opts) {
  RunResult all;
  json list = json::array();
  for (const std::string& name : scenario_names()) {
    const Scenario s = make_scenario(name);
    json runs = json::object();
    for (const std::string& run : s.runs) {
      RunResult r = run_scenario(s, run, opts);
      all.status = worse(all.status, r.status);
      runs[run] = std::move(r.report);
    }
    list.push_back({{"name", name}, {"runs", std::move(runs)}});
  }
  all.report = {{"scenarios", std::move(list)}, {"status", to_string(all.status)}};
  return all;
}

json describe(const Scenario& s) {
  json j = {{"name", s.name},
            {"description", s.description},
            {"system", system_to_json(s.system)},
            {"t_grid", s.t_grid},
            {"sigma_grid", s.sigma_grid},
            {"runs", s.runs},
            {"expected", to_json(s.expected)}};
  if (s.gain) {
    j["gain"] = matrix_to_json(*s.gain);
    j["gain_mode"] = s.gain_mode;
  }
  if (s.sec32) {
    j["parameters"] = {{"c0", s.sec32->c0},
                       {"c1", s.sec32->c1},
                       {"gamma0", s.sec32->gamma0},
                       {"gamma1", s.sec32->gamma1},
                       {"plant", s.sec32->plant}};
  }
  return j;
}

}  // namespace ltv
