#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "ltvobs/criteria.hpp"
#include "ltvobs/dual.hpp"
#include "ltvobs/error.hpp"
#include "ltvobs/feedback.hpp"
#include "ltvobs/flow.hpp"
#include "ltvobs/gramian.hpp"
#include "ltvobs/nucert.hpp"
#include "ltvobs/report.hpp"
#include "ltvobs/scenario.hpp"
#include "ltvobs/system_config.hpp"

namespace ltv::cli {

namespace {

using nlohmann::json;

constexpr int kUsage = 1;

struct Common {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  std::string method = "dopri5";
  std::uint64_t seed = 20240501;
  std::string out;
  bool timing = false;
  double pd_tol = kDefaultPdTol;

  IntegratorConfig cfg() const {
    IntegratorConfig c;
    c.rel_tol = rel_tol;
    c.abs_tol = abs_tol;
    c.method = method == "rk4" ? OdeMethod::Rk4 : OdeMethod::Dopri5;
    c.validate();
    return c;
  }
};

struct Grids {
  std::string t = "0:20:21";
  std::string sigma = "0.25:8:16";
  bool t_set = false;
  bool sigma_set = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--rel-tol", c.rel_tol, "integrator relative tolerance")->capture_default_str();
  sub->add_option("--abs-tol", c.abs_tol, "integrator absolute tolerance")->capture_default_str();
  sub->add_option("--method", c.method, "dopri5 or rk4")
      ->check(CLI::IsMember({"dopri5", "rk4"}))
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for random probe vectors")->capture_default_str();
  sub->add_option("--pd-tol", c.pd_tol, "positive-definiteness tolerance")->capture_default_str();
  sub->add_option("--out", c.out, "report file (default stdout)");
  sub->add_flag("--timing", c.timing, "add wall time to the report");
}

void add_grids(CLI::App* sub, Grids& g) {
  sub->add_option("--t-grid", g.t, "start times a:b:n")->capture_default_str();
  sub->add_option("--sigma-grid", g.sigma, "window lengths a:b:n")->capture_default_str();
}

json common_json(const Common& c) {
  return {{"integrator", to_json(c.cfg())}, {"seed", c.seed}, {"pd_tol", c.pd_tol}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

const TvMatrix& require(const std::optional<TvMatrix>& m, const char* what) {
  if (!m) throw ConfigError(std::string("system file lacks '") + what + "'");
  return *m;
}

TvMatrix load_gain(const std::string& path, const std::string& mode) {
  const json j = load_json_file(path);
  for (const char* key : {mode == "input" ? "L" : "F", "gain"}) {
    if (j.contains(key)) return matrix_from_json(j.at(key), key);
  }
  throw ConfigError("gain file needs '" + std::string(mode == "input" ? "L" : "F") + "' or 'gain'");
}

struct Outcome {
  int code = 0;
  json result;
  json config;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transition matrices, Gramians and observability certificates of LTV systems"};
  app.name("ltvobs");
  app.require_subcommand(1);
  Common common;
  Grids grids;
  std::string system_path;

  auto* gramian = app.add_subcommand("gramian", "one Gramian M, W or K");
  std::string kind = "M";
  double t = 0.0, sigma = 1.0, tau = 0.0;
  gramian->add_option("--system", system_path, "system file")->required();
  gramian->add_option("--kind", kind, "M, W or K")->check(CLI::IsMember({"M", "W", "K"}));
  gramian->add_option("--t", t, "start time")->required();
  gramian->add_option("--sigma", sigma, "window length")->required();
  add_common(gramian, common);

  auto* transition_cmd = app.add_subcommand("transition", "transition matrix Phi(t, tau)");
  transition_cmd->add_option("--system", system_path, "system file")->required();
  transition_cmd->add_option("--t", t, "final time")->required();
  transition_cmd->add_option("--tau", tau, "initial time")->required();
  add_common(transition_cmd, common);

  auto* criteria = app.add_subcommand("criteria", "rank tests and Gramian positivity");
  std::string crit_mode = "all";
  int q = -1;
  double t_a = 0.0, t0 = 0.0, tf = 1.0, rank_tol = kDefaultRankTol;
  criteria->add_option("--system", system_path, "system file")->required();
  criteria->add_option("--mode", crit_mode, "lti, ltv, gramian or all")
      ->check(CLI::IsMember({"lti", "ltv", "gramian", "all"}));
  criteria->add_option("--q", q, "order of the L stack (default n-1)");
  criteria->add_option("--at", t_a, "time of the L stack");
  criteria->add_option("--t0", t0, "Gramian interval start");
  criteria->add_option("--tf", tf, "Gramian interval end");
  criteria->add_option("--rank-tol", rank_tol, "relative singular-value cutoff");
  add_common(criteria, common);

  auto* certify = app.add_subcommand("certify", "empirical NUCO / NUCC / UCO certificate");
  std::string cert_mode = "nuco";
  std::string csv_path;
  certify->add_option("--system", system_path, "system file")->required();
  certify->add_option("--mode", cert_mode, "nuco, nucc or uco")
      ->check(CLI::IsMember({"nuco", "nucc", "uco"}));
  certify->add_option("--emit-csv", csv_path, "write the (t, sigma, lambda_min, lambda_max) table");
  add_grids(certify, grids);
  add_common(certify, common);

  auto* dual = app.add_subcommand("dual", "dual system, Gramian identity and duality check");
  std::string dual_out;
  dual->add_option("--system", system_path, "system file")->required();
  dual->add_option("--emit-system", dual_out, "write the dual system file");
  add_grids(dual, grids);
  add_common(dual, common);

  auto* feedback = app.add_subcommand("feedback", "closed-loop observability / controllability");
  std::string gain_path, fb_mode = "output";
  ConstantOverrides ov;
  feedback->add_option("--system", system_path, "system file")->required();
  feedback->add_option("--gain", gain_path, "gain file with F (output) or L (input)")->required();
  feedback->add_option("--mode", fb_mode, "output or input")->check(CLI::IsMember({"output", "input"}));
  feedback->add_option("--K0", ov.K0, "override the plant K0");
  feedback->add_option("--a", ov.a, "override the plant growth rate");
  feedback->add_option("--eps", ov.eps, "override the plant eps");
  feedback->add_option("--script-K", ov.script_K, "override the gain scale");
  feedback->add_option("--delta", ov.delta, "override the gain rate");
  feedback->add_option("--script-C", ov.script_C, "override the output scale");
  feedback->add_option("--gamma", ov.gamma, "override the output decay rate");
  add_grids(feedback, grids);
  add_common(feedback, common);

  auto* scenario = app.add_subcommand("scenario", "built-in scenario library");
  std::string name, run_name;
  bool list = false, all = false;
  scenario->add_option("--name", name, "scenario name");
  scenario->add_option("--run", run_name, "certify, dual, twothird or feedback (default: all of the scenario's runs)");
  scenario->add_flag("--list", list, "list scenarios");
  scenario->add_flag("--all", all, "run every scenario");
  add_grids(scenario, grids);
  add_common(scenario, common);

  std::vector<std::string> argv_store{"ltvobs"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << app.help();
    return kUsage;
  }
  for (const CLI::App* sub : {certify, dual, feedback, scenario}) {
    if (sub->parsed()) {
      grids.t_set = sub->count("--t-grid") > 0;
      grids.sigma_set = sub->count("--sigma-grid") > 0;
    }
  }

  const auto started = std::chrono::steady_clock::now();
  Outcome o;
  try {
    const IntegratorConfig cfg = common.cfg();
    o.config = common_json(common);
    std::optional<SystemConfig> sys;
    if (!system_path.empty()) {
      sys = load_system(system_path);
      o.config["system"] = system_to_json(*sys);
    }
    const auto t_grid = TimeGrid::parse(grids.t).points();
    const auto sigma_grid = TimeGrid::parse(grids.sigma).points();

    if (gramian->parsed()) {
      const GramianKind k = parse_gramian_kind(kind);
      GramianResult g;
      if (k == GramianKind::Observability) {
        g = obs_gramian(sys->A, require(sys->C, "C"), t, sigma, cfg);
      } else if (k == GramianKind::Controllability) {
        g = ctrl_gramian(sys->A, require(sys->B, "B"), t, sigma, cfg);
      } else {
        g = transported_gramian(sys->A, require(sys->B, "B"), t, sigma, cfg);
      }
      o.result = to_json(g);
    } else if (transition_cmd->parsed()) {
      const Eigen::MatrixXd phi = transition(sys->A, t, tau, cfg);
      json rows = json::array();
      for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < phi.cols(); ++j) row.push_back(phi(i, j));
        rows.push_back(row);
      }
      o.result = {{"t", t}, {"tau", tau}, {"matrix", rows}};
    } else if (criteria->parsed()) {
      const TvMatrix& C = require(sys->C, "C");
      const int order = q >= 0 ? q : sys->n - 1;
      if ((crit_mode == "lti" || crit_mode == "all") && sys->A.is_constant() && C.is_constant()) {
        o.result["lti"] = to_json(lti_obs_rank(sys->A.eval(0.0), C.eval(0.0), rank_tol));
      } else if (crit_mode == "lti") {
        throw ConfigError("the LTI rank test needs constant A and C");
      }
      if (crit_mode == "ltv" || crit_mode == "all") {
        json r = to_json(ltv_L_rank(sys->A, C, order, t_a, 1e-5, rank_tol));
        r["q"] = order;
        o.result["ltv"] = r;
      }
      if (crit_mode == "gramian" || crit_mode == "all") {
        const ObservabilityWitness w = observable_at(sys->A, C, t0, tf, cfg, common.pd_tol);
        o.result["gramian"] = {{"t0", t0}, {"tf", tf}, {"observable", w.observable},
                               {"witness", to_json(w.gramian)}};
      }
    } else if (certify->parsed()) {
      o.config["t_grid"] = grids.t;
      o.config["sigma_grid"] = grids.sigma;
      o.config["mode"] = cert_mode;
      const GramianTable* table = nullptr;
      std::optional<NucoCertificate> nuco;
      std::optional<NuccCertificate> nucc;
      bool ok = false;
      if (cert_mode == "nucc") {
        nucc = certify_nucc(sys->A, require(sys->B, "B"), t_grid, sigma_grid, cfg, common.pd_tol);
        o.result = to_json(*nucc);
        ok = nucc->verdict == Verdict::CertifiedOnGrid;
        table = &nucc->tables.W;
      } else {
        nuco = certify_nuco(sys->A, require(sys->C, "C"), t_grid, sigma_grid, cfg, common.pd_tol);
        o.result = to_json(*nuco);
        ok = nuco->verdict == Verdict::CertifiedOnGrid && (cert_mode != "uco" || nuco->uniform);
        table = &nuco->table;
      }
      if (!csv_path.empty()) write_text(csv_path, table_csv(*table));
      o.code = ok ? 0 : 3;
    } else if (dual->parsed()) {
      o.config["t_grid"] = grids.t;
      o.config["sigma_grid"] = grids.sigma;
      const TvMatrix& C = require(sys->C, "C");
      const DualSystem d = dualize(sys->A, C);
      SystemConfig dsys;
      dsys.A = d.A_dual;
      dsys.B = d.B_dual;
      dsys.n = d.A_dual.rows();
      dsys.p = d.B_dual.cols();
      const json dual_json = system_to_json(dsys);
      if (!dual_out.empty()) write_text(dual_out, dual_json.dump(2) + "\n");
      o.result["dual_system"] = dual_json;
      const GramianIdentityReport id = check_gramian_identity(sys->A, C, t_grid, sigma_grid, cfg);
      o.result["identity"] = to_json(id);
      o.code = id.passed ? 0 : 3;
      try {
        const DualityReport th = check_duality_theorem(sys->A, C, t_grid, sigma_grid, cfg, common.pd_tol);
        o.result["theorem"] = to_json(th);
        if (!th.verdicts_agree || th.dual_bound_violations > 0) o.code = 3;
      } catch (const HypothesisUnmet& e) {
        o.result["theorem"] = {{"error", e.code()}, {"condition", e.condition()}, {"message", e.what()}};
        if (o.code == 0) o.code = 2;
      }
    } else if (feedback->parsed()) {
      o.config["t_grid"] = grids.t;
      o.config["sigma_grid"] = grids.sigma;
      o.config["mode"] = fb_mode;
      const TvMatrix gain = load_gain(gain_path, fb_mode);
      o.config["gain"] = matrix_to_json(gain);
      FeedbackOptions fo;
      fo.seed = common.seed;
      fo.pd_tol = common.pd_tol;
      fo.overrides = ov;
      if (fb_mode == "input") {
        const InputFeedbackReport r =
            verify_input_feedback(sys->A, require(sys->B, "B"), gain, t_grid, sigma_grid, cfg, fo);
        o.result = to_json(r);
        const bool clean = r.paths_agree && (!r.dual_path || r.dual_path->violations.empty());
        o.code = clean ? 0 : 3;
      } else {
        const FeedbackCheck c = verify_preservation(sys->A, require(sys->B, "B"), gain,
                                                    require(sys->C, "C"), t_grid, sigma_grid, cfg, fo);
        o.result = to_json(c);
        o.code = c.violations.empty() && c.verdicts_agree ? 0 : 3;
      }
    } else if (scenario->parsed()) {
      RunOptions ro;
      ro.cfg = cfg;
      ro.seed = common.seed;
      ro.pd_tol = common.pd_tol;
      if (grids.t_set) ro.t_grid = t_grid;
      if (grids.sigma_set) ro.sigma_grid = sigma_grid;
      o.config["scenario"] = {{"name", name}, {"run", run_name}, {"all", all}, {"list", list}};
      if (grids.t_set) o.config["t_grid"] = grids.t;
      if (grids.sigma_set) o.config["sigma_grid"] = grids.sigma;
      if (list) {
        json names = json::array();
        for (const auto& n : scenario_names()) names.push_back(describe(make_scenario(n)));
        o.result["scenarios"] = names;
      } else if (all) {
        RunResult r = run_all_scenarios(ro);
        o.result = std::move(r.report);
        o.code = exit_code(r.status);
      } else {
        if (name.empty()) throw ConfigError("scenario needs --name, --list or --all");
        const Scenario s = make_scenario(name);
        o.result["scenario"] = describe(s);
        RunStatus st = RunStatus::Ok;
        json runs = json::object();
        for (const std::string& r : run_name.empty() ? s.runs : std::vector<std::string>{run_name}) {
          RunResult res = run_scenario(s, r, ro);
          st = worse(st, res.status);
          runs[r] = std::move(res.report);
        }
        o.result["runs"] = std::move(runs);
        o.result["status"] = to_string(st);
        o.code = exit_code(st);
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownIdentifier& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const HypothesisUnmet& e) {
    o.result = {{"error", e.code()}, {"condition", e.condition()}, {"message", e.what()}};
    o.code = 2;
  } catch (const Error& e) {
    o.result = {{"error", e.code()}, {"message", e.what()}};
    o.code = 3;
  }

  json report = run_report(args, o.config, std::move(o.result));
  report["exit_code"] = o.code;
  if (common.timing) {
    report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  const std::string text = report.dump(2) + "\n";
  try {
    if (common.out.empty()) {
      out << text;
    } else {
      write_text(common.out, text);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return o.code;
}

}  // namespace ltv::cli
