#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

/// Plant and optional input/output maps, as read from a system file:
///
///     { "n": 2, "p": 1, "m": 1,
///       "A": [["0", "1"], ["0", "0"]],
///       "B": [["0"], ["1"]],
///       "C": [["1", "0"]] }
///
/// Entries are expression strings (bare JSON numbers are accepted too).
struct SystemConfig {
  int n = 0;
  int p = 0;
  int m = 0;
  TvMatrix A;
  std::optional<TvMatrix> B;
  std::optional<TvMatrix> C;
};

TvMatrix matrix_from_json(const nlohmann::json& j, const std::string& name);
nlohmann::json matrix_to_json(const TvMatrix& m);

SystemConfig system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const SystemConfig& sys);

SystemConfig load_system(const std::string& path);
nlohmann::json load_json_file(const std::string& path);

}  // namespace ltv
