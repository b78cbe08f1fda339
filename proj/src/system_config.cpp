#include "ltvobs/system_config.hpp"

#include <fstream>

#include "ltvobs/error.hpp"

namespace ltv {

using nlohmann::json;

TvMatrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + name + "' must be a non-empty array of rows");
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty()) throw ConfigError("'" + name + "' rows must be non-empty arrays");
    auto& out = rows.emplace_back();
    for (const auto& cell : row) {
      if (cell.is_string()) {
        out.push_back(cell.get<std::string>());
      } else if (cell.is_number()) {
        out.push_back(cell.dump());
      } else {
        throw ConfigError("'" + name + "' entries must be expression strings");
      }
    }
  }
  try {
    return TvMatrix::parse(rows);
  } catch (const DimensionMismatch& e) {
    throw ConfigError("'" + name + "': " + e.what());
  }
}

json matrix_to_json(const TvMatrix& m) { return json(m.to_strings()); }

SystemConfig system_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("system file must be a JSON object");
  SystemConfig sys;
  if (!j.contains("A")) throw ConfigError("system file lacks 'A'");
  sys.A = matrix_from_json(j.at("A"), "A");
  if (!sys.A.is_square()) throw ConfigError("'A' must be square");
  sys.n = sys.A.rows();
  if (j.contains("n") && j.at("n").get<int>() != sys.n) throw ConfigError("'n' disagrees with 'A'");

  if (j.contains("B") && !j.at("B").is_null()) {
    sys.B = matrix_from_json(j.at("B"), "B");
    if (sys.B->rows() != sys.n) throw ConfigError("'B' must have n rows");
    sys.p = sys.B->cols();
    if (j.contains("p") && j.at("p").get<int>() != sys.p) throw ConfigError("'p' disagrees with 'B'");
  } else if (j.contains("p")) {
    sys.p = j.at("p").get<int>();
  }

  if (j.contains("C") && !j.at("C").is_null()) {
    sys.C = matrix_from_json(j.at("C"), "C");
    if (sys.C->cols() != sys.n) throw ConfigError("'C' must have n columns");
    sys.m = sys.C->rows();
    if (j.contains("m") && j.at("m").get<int>() != sys.m) throw ConfigError("'m' disagrees with 'C'");
  } else if (j.contains("m")) {
    sys.m = j.at("m").get<int>();
  }
  return sys;
}

json system_to_json(const SystemConfig& sys) {
  json j;
  j["n"] = sys.n;
  j["p"] = sys.p;
  j["m"] = sys.m;
  j["A"] = matrix_to_json(sys.A);
  if (sys.B) j["B"] = matrix_to_json(*sys.B);
  if (sys.C) j["C"] = matrix_to_json(*sys.C);
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

SystemConfig load_system(const std::string& path) { return system_from_json(load_json_file(path)); }

}  // namespace ltv
