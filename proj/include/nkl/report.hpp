// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NKL_REPORT_HPP
#define NKL_REPORT_HPP

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nkl/harness.hpp"

namespace nkl {

/// Decimal-dot float with 12 significant digits, the CSV/JSON number format.
inline std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Run configuration: flat key=value file, flag overrides win.

struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 12345;
  int n = 0;
  int k = 0;
  long long trials = 0;
  int depth = 4;           // Davies truncation L
  std::string delta = "0.2";  // Cantor delta (exact decimal/rational string)
  double alpha = 0.25;
  double epsilon = 0.1;
  std::string policy = "uniform";  // index | uniform
  std::string out = "nkl_out";
  int workers = 1;
  std::map<std::string, double> tolerance_overrides;

  /// Serialization round-trips byte-identically: fixed key order, one
  /// key=value per line.
  std::string serialize() const {
    std::ostringstream os;
    os << "experiment=" << experiment << "\n";
    os << "seed=" << seed << "\n";
    os << "n=" << n << "\n";
    os << "k=" << k << "\n";
    os << "trials=" << trials << "\n";
    os << "depth=" << depth << "\n";
    os << "delta=" << delta << "\n";
    os << "alpha=" << format_float(alpha) << "\n";
    os << "epsilon=" << format_float(epsilon) << "\n";
    os << "policy=" << policy << "\n";
    os << "out=" << out << "\n";
    os << "workers=" << workers << "\n";
    for (const auto& [k2, v] : tolerance_overrides)
      os << "tol_" << k2 << "=" << format_float(v) << "\n";
    return os.str();
  }

  void set(const std::string& key, const std::string& value) {
    if (key == "experiment") experiment = value;
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "n") n = std::stoi(value);
    else if (key == "k") k = std::stoi(value);
    else if (key == "trials") trials = std::stoll(value);
    else if (key == "depth") depth = std::stoi(value);
    else if (key == "delta") delta = value;
    else if (key == "alpha") alpha = std::stod(value);
    else if (key == "epsilon") epsilon = std::stod(value);
    else if (key == "policy") policy = value;
    else if (key == "out") out = value;
    else if (key == "workers") workers = std::stoi(value);
    else if (key.rfind("tol_", 0) == 0) tolerance_overrides[key.substr(4)] = std::stod(value);
    else throw std::invalid_argument("unknown config key: " + key);
  }

  static RunConfig parse(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad config line: " + line);
      c.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return c;
  }

  TieBreakPolicy::Kind policy_kind() const {
    if (policy == "index") return TieBreakPolicy::Kind::IndexOrder;
    if (policy == "uniform") return TieBreakPolicy::Kind::UniformRandom;
    throw std::invalid_argument("policy must be 'index' or 'uniform'");
  }
};

// ---------------------------------------------------------------------------
// CSV: header row, one row per (parameter point, statistic), UTF-8, comma
// delimiter, 12-significant-digit floats, exact rationals as p/q.

inline std::string result_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "experiment,params,stat,value,exact,se,trials\n";
  std::string params;
  for (const auto& [k, v] : r.params) {
    if (!params.empty()) params += ";";
    params += k + "=" + v;
  }
  for (const auto& s : r.stats) {
    os << r.experiment << "," << params << "," << s.name << "," << format_float(s.value) << ","
       << s.exact << "," << format_float(s.se) << "," << s.trials << "\n";
  }
  for (const auto& c : r.checks) {
    os << r.experiment << "," << params << ",check:" << c.name << "," << (c.pass ? 1 : 0) << ",,"
       << format_float(0.0) << ",1\n";
  }
  return os.str();
}

inline nlohmann::json result_json(const ExperimentResult& r, std::uint64_t seed) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["experiment"] = r.experiment;
  j["seed"] = seed;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = params;
  j["stats"] = nlohmann::json::array();
  for (const auto& s : r.stats) {
    nlohmann::json js;
    js["name"] = s.name;
    js["value"] = s.value;
    js["se"] = s.se;
    js["trials"] = s.trials;
    js["raw"] = {{"sum", s.sum}, {"sumsq", s.sumsq}};
    if (!s.exact.empty()) js["exact"] = s.exact;
    j["stats"].push_back(js);
  }
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["observed"] = c.observed;
    jc["bound"] = c.bound;
    jc["relation"] = c.relation;
    j["checks"].push_back(jc);
  }
  j["pass"] = r.passed();
  return j;
}

// ---------------------------------------------------------------------------
// Minimal JSON-schema checker covering the subset the summary schema uses:
// type, required, properties, items, enum.

inline bool json_matches_type(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

inline bool validate_against_schema(const nlohmann::json& value, const nlohmann::json& schema,
                                    std::string* error = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (error) *error = msg;
    return false;
  };
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    if (t.is_string()) {
      if (!json_matches_type(value, t.get<std::string>()))
        return fail("expected type " + t.get<std::string>());
    } else if (t.is_array()) {
      bool any = false;
      for (const auto& tt : t)
        if (json_matches_type(value, tt.get<std::string>())) any = true;
      if (!any) return fail("value matches none of the allowed types");
    }
  }
  if (schema.contains("enum")) {
    bool any = false;
    for (const auto& e : schema["enum"])
      if (e == value) any = true;
    if (!any) return fail("value not in enum");
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& req : schema["required"])
        if (!value.contains(req.get<std::string>()))
          return fail("missing required key " + req.get<std::string>());
    if (schema.contains("properties"))
      for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
        if (value.contains(it.key()))
          if (!validate_against_schema(value[it.key()], it.value(), error)) return false;
  }
  if (value.is_array() && schema.contains("items"))
    for (const auto& item : value)
      if (!validate_against_schema(item, schema["items"], error)) return false;
  return true;
}

/// The shipped summary schema (also written to schema/summary.schema.json).
inline nlohmann::json summary_schema() {
  return nlohmann::json::parse(R"({
    "type": "object",
    "required": ["schema_version", "experiment", "seed", "params", "stats", "checks", "pass"],
    "properties": {
      "schema_version": {"type": "integer"},
      "experiment": {"type": "string"},
      "seed": {"type": "integer"},
      "params": {"type": "object"},
      "stats": {
        "type": "array",
        "items": {
          "type": "object",
          "required": ["name", "value", "se", "trials", "raw"],
          "properties": {
            "name": {"type": "string"},
            "value": {"type": "number"},
            "se": {"type": "number"},
            "trials": {"type": "integer"},
            "exact": {"type": "string"},
            "raw": {
              "type": "object",
              "required": ["sum", "sumsq"],
              "properties": {"sum": {"type": "number"}, "sumsq": {"type": "number"}}
            }
          }
        }
      },
      "checks": {
        "type": "array",
        "items": {
          "type": "object",
          "required": ["name", "pass", "observed", "bound", "relation"],
          "properties": {
            "name": {"type": "string"},
            "pass": {"type": "boolean"},
            "observed": {"type": "number"},
            "bound": {"type": "number"},
            "relation": {"type": "string"}
          }
        }
      },
      "pass": {"type": "boolean"}
    }
  })");
}

}  // namespace nkl

#endif
