#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "ltvobs/criteria.hpp"
#include "ltvobs/dual.hpp"
#include "ltvobs/envelope.hpp"
#include "ltvobs/feedback.hpp"
#include "ltvobs/gramian.hpp"
#include "ltvobs/nucert.hpp"
#include "ltvobs/ode.hpp"

namespace ltv {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchema = 1;

// Every certificate is a statement about the sampled grid only.
inline constexpr const char* kGridNote =
    "finite-grid empirical certificate; bounds are verified only at the listed grid points";

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

nlohmann::json to_json(const IntegratorConfig& cfg);
nlohmann::json to_json(const GramianResult& g);
nlohmann::json to_json(const RankReport& r);
nlohmann::json to_json(const GrowthEnvelope& e);  // constants and residuals, no samples
nlohmann::json to_json(const KalmanEnvelope& k);
nlohmann::json to_json(const BoundResiduals& r);
nlohmann::json to_json(const NucoCertificate& c);
nlohmann::json to_json(const NuccCertificate& c);
nlohmann::json to_json(const CertOutcome& o);
nlohmann::json to_json(const TwoImplyThirdReport& r);
nlohmann::json to_json(const GramianIdentityReport& r);
nlohmann::json to_json(const DualityReport& r);
nlohmann::json to_json(const FeedbackGains& g);
nlohmann::json to_json(const ClosedGrowthReport& r);
nlohmann::json to_json(const FeedbackCheck& c);
nlohmann::json to_json(const InputFeedbackReport& r);

/// (t, sigma, lambda_min, lambda_max) rows with a header line.
std::string table_csv(const GramianTable& table);

/// Wraps a command result: schema, version, command echo, config hash and
/// the grid note. `config` is hashed through its compact dump.
nlohmann::json run_report(const std::vector<std::string>& command, const nlohmann::json& config,
                          nlohmann::json result);

}  // namespace ltv
