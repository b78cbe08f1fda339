#include "ltvobs/report.hpp"

#include <cstdint>
#include <cstdio>
#include <sstream>

namespace ltv {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const IntegratorConfig& cfg) {
  return {{"method", to_string(cfg.method)},
          {"rel_tol", cfg.rel_tol},
          {"abs_tol", cfg.abs_tol},
          {"fixed_step", cfg.fixed_step}};
}

json to_json(const GramianResult& g) {
  return {{"kind", to_string(g.kind)},
          {"t", g.t},
          {"sigma", g.sigma},
          {"matrix", matrix_json(g.matrix)},
          {"lambda_min", g.lambda_min},
          {"lambda_max", g.lambda_max},
          {"quad_error_estimate", g.quad_error_estimate}};
}

json to_json(const RankReport& r) {
  json j = {{"matrix_rows", r.matrix_rows},
            {"rank", r.rank},
            {"singular_values", r.singular_values},
            {"observable", r.observable}};
  j["tested_at"] = r.tested_at ? json(*r.tested_at) : json(nullptr);
  return j;
}

json to_json(const GrowthEnvelope& e) {
  return {{"K0", e.K0},
          {"a", e.a},
          {"eps", e.eps},
          {"samples", e.samples.size()},
          {"coverage_violations", e.coverage_violations()},
          {"max_log_residual", e.max_log_residual},
          {"min_log_residual", e.min_log_residual}};
}

json to_json(const KalmanEnvelope& k) {
  json table = json::array();
  for (const auto& [edge, alpha] : k.alpha_table) table.push_back({edge, alpha});
  return {{"nu", k.nu},
          {"bucket_width", k.bucket_width},
          {"alpha_table", table},
          {"coverage_violations", k.coverage_violations}};
}

json to_json(const BoundResiduals& r) {
  return {{"lower_violations", r.lower_violations},
          {"upper_violations", r.upper_violations},
          {"max_lower_log_gap", r.max_lower_log_gap},
          {"max_upper_log_gap", r.max_upper_log_gap}};
}

json to_json(const NucoCertificate& c) {
  return {{"verdict", to_string(c.verdict)},
          {"uniform", c.uniform},
          {"nu0", c.nu0},
          {"nu1", c.nu1},
          {"theta0", c.theta0},
          {"theta1", c.theta1},
          {"sigma0", c.sigma0},
          {"t_grid", c.t_grid},
          {"sigma_grid", c.sigma_grid},
          {"residuals", to_json(c.residuals)}};
}

json to_json(const NuccCertificate& c) {
  return {{"verdict", to_string(c.verdict)},
          {"uniform", c.uniform},
          {"mu0", c.mu0},
          {"mu1", c.mu1},
          {"mu0_tilde", c.mu0_tilde},
          {"mu1_tilde", c.mu1_tilde},
          {"alpha0", c.alpha0},
          {"alpha1", c.alpha1},
          {"beta0", c.beta0},
          {"beta1", c.beta1},
          {"sigma0", c.sigma0},
          {"t_grid", c.t_grid},
          {"sigma_grid", c.sigma_grid},
          {"w_residuals", to_json(c.w_residuals)},
          {"k_residuals", to_json(c.k_residuals)}};
}

json to_json(const CertOutcome& o) { return {{"certified", o.certified}, {"status", o.status}}; }

json to_json(const TwoImplyThirdReport& r) {
  json tested = json::array();
  for (const auto& imp : r.tested) {
    tested.push_back({{"premises", {imp.premise_a, imp.premise_b}},
                      {"conclusion", imp.conclusion},
                      {"holds", imp.holds}});
  }
  return {{"w_bounds", r.w_bounds},       {"k_bounds", r.k_bounds},
          {"kalman", r.kalman},           {"properties_holding", r.properties_holding},
          {"tested", tested},             {"findings", r.findings},
          {"note", r.note}};
}

json to_json(const GramianIdentityReport& r) {
  return {{"max_deviation", r.max_deviation},
          {"worst_t", r.worst_t},
          {"worst_sigma", r.worst_sigma},
          {"points", r.points},
          {"tolerance", r.tolerance},
          {"passed", r.passed}};
}

json to_json(const DualityReport& r) {
  return {{"envelope", to_json(r.envelope)},
          {"primal", to_json(r.primal)},
          {"dual", to_json(r.dual)},
          {"verdicts_agree", r.verdicts_agree},
          {"rates", {{"nu0", r.nu0}, {"nu1", r.nu1}, {"mu0", r.mu0}, {"mu1", r.mu1}}},
          {"max_rate_gap", r.max_rate_gap},
          {"rate_slack", r.rate_slack},
          {"rates_match", r.rates_match},
          {"dual_bound",
           {{"K0", r.envelope.K0},
            {"a", r.envelope.a + r.envelope.eps},
            {"eps", r.envelope.eps},
            {"pairs", r.dual_bound_pairs},
            {"violations", r.dual_bound_violations},
            {"max_ratio", r.max_dual_bound_ratio}}}};
}

json to_json(const FeedbackGains& g) {
  return {{"script_K", g.script_K},
          {"delta", g.delta},
          {"script_C", g.script_C},
          {"gamma", g.gamma},
          {"gain_identically_zero", g.gain_identically_zero},
          {"envelope_violations", g.envelope_violations},
          {"fitted_on", {{"start", g.fitted_on.empty() ? 0.0 : g.fitted_on.front()},
                         {"end", g.fitted_on.empty() ? 0.0 : g.fitted_on.back()},
                         {"count", g.fitted_on.size()}}},
          {"conditionGED", g.ged},
          {"conditionAED", g.aed}};
}

json to_json(const ClosedGrowthReport& r) {
  return {{"gronwall_factor", r.gronwall_factor},
          {"max_ratio", r.max_ratio},
          {"worst_t2", r.worst_t2},
          {"worst_t1", r.worst_t1},
          {"pairs", r.pairs},
          {"violations", r.violations}};
}

json to_json(const FeedbackCheck& c) {
  json samples = json::array();
  for (const LambdaSample& s : c.samples) {
    samples.push_back({{"t", s.t},
                       {"sigma", s.sigma},
                       {"lower", s.lower},
                       {"observed_min", s.observed_min},
                       {"observed_max", s.observed_max},
                       {"upper", s.upper}});
  }
  json j = {{"plant_envelope", to_json(c.plant_envelope)},
            {"gains", to_json(c.gains)},
            {"hypotheses_met", c.hypotheses_met},
            {"unmet_conditions", c.unmet_conditions},
            {"plant", to_json(c.plant)},
            {"closed", to_json(c.closed)},
            {"verdicts_agree", c.verdicts_agree}};
  if (c.hypotheses_met) {
    j["phi"] = c.phi;
    j["case"] = to_string(c.phi_case);
    j["psi"] = c.psi;
    j["closed_growth"] = to_json(c.closed_growth);
    j["max_lower_ratio"] = c.max_lower_ratio;
    j["max_upper_ratio"] = c.max_upper_ratio;
    j["lambda"] = samples;
  }
  j["violations"] = c.violations;
  return j;
}

json to_json(const InputFeedbackReport& r) {
  json j = {{"script_L", r.script_L},
            {"ell", r.ell},
            {"script_B", r.script_B},
            {"beta", r.beta},
            {"conditionBEL", r.bel},
            {"plant_envelope", to_json(r.plant_envelope)},
            {"dual_closed", to_json(r.dual_closed)},
            {"direct", to_json(r.direct)},
            {"dual_back_mismatch", r.dual_back_mismatch},
            {"paths_agree", r.paths_agree}};
  j["dual_path"] = r.dual_path ? to_json(*r.dual_path) : json(nullptr);
  return j;
}

std::string table_csv(const GramianTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "t,sigma,lambda_min,lambda_max\n";
  for (std::size_t i = 0; i < table.t_grid.size(); ++i) {
    for (std::size_t j = 0; j < table.sigma_grid.size(); ++j) {
      out << table.t_grid[i] << ',' << table.sigma_grid[j] << ','
          << table.lambda_min(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ','
          << table.lambda_max(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
    }
  }
  return out.str();
}

json run_report(const std::vector<std::string>& command, const json& config, json result) {
  return {{"schema", kSchema},
          {"version", kVersion},
          {"command", command},
          {"config_hash", fnv1a_hex(config.dump())},
          {"note", kGridNote},
          {"result", std::move(result)}};
}

}  // namespace ltv
