#pragma once

// JSON and CSV surfaces: space/family documents, nets, reports, and a
// validator for the subset of JSON Schema used by the shipped config schema.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "normlab/distortion.hpp"
#include "normlab/error.hpp"
#include "normlab/nets.hpp"
#include "normlab/spaces.hpp"

namespace normlab {

using json = nlohmann::json;

/// Shortest text that round-trips the double ("inf", "-inf", "nan" for
/// non-finite values).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// JSON has no inf/nan: encode them as strings.
inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline std::string join_doubles(const std::vector<double>& v, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

/// RFC 4180 CSV: comma separated, CRLF-free, fields quoted only when they
/// contain a comma, quote, or line break.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row(header); }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

  static std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

 private:
  std::ostringstream out_;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& reason) {
  throw Error(ErrorKind::config, path + ": " + reason);
}

inline double read_number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  config_error(path, "expected a number");
}

inline std::vector<double> read_vector(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(read_number(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::vector<std::vector<double>> read_matrix(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(read_vector(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

}  // namespace detail

// --- spaces ---------------------------------------------------------------

inline json to_json(const NormSpec& s) {
  switch (s.kind()) {
    case SpaceKind::linf: return {{"kind", "lp"}, {"p", "inf"}, {"dim", s.dim()}};
    case SpaceKind::lp: return {{"kind", "lp"}, {"p", s.p()}, {"dim", s.dim()}};
    case SpaceKind::polytope: {
      json fs = json::array();
      for (std::size_t f = 0; f < s.functional_count(); ++f) {
        auto row = s.functional(f);
        fs.push_back(std::vector<double>(row.begin(), row.end()));
      }
      return {{"kind", "polytope"}, {"functionals", fs}};
    }
  }
  return {};
}

/// {"kind":"lp","p":2.0,"dim":4} (p may be "inf") or
/// {"kind":"polytope","functionals":[[...],...]}.
inline NormSpec norm_spec_from_json(const json& j, const std::string& path = "space") {
  if (!j.is_object()) detail::config_error(path, "expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) detail::config_error(path + ".kind", "missing or not a string");
  const auto kind = j["kind"].get<std::string>();
  try {
    if (kind == "lp") {
      if (!j.contains("p")) detail::config_error(path + ".p", "missing");
      if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) {
        detail::config_error(path + ".dim", "expected a positive integer");
      }
      const double p = detail::read_number(j["p"], path + ".p");
      const auto dim = j["dim"].get<std::size_t>();
      return std::isinf(p) ? NormSpec::linf(dim) : NormSpec::lp(p, dim);
    }
    if (kind == "polytope") {
      if (!j.contains("functionals")) detail::config_error(path + ".functionals", "missing");
      return NormSpec::polytope(detail::read_matrix(j["functionals"], path + ".functionals"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    detail::config_error(path, e.message());
  }
  detail::config_error(path + ".kind", "expected \"lp\" or \"polytope\", got \"" + kind + "\"");
}

inline json to_json(const VectorFamily& f) { return {{"space", to_json(f.space())}, {"vectors", f.vectors()}}; }

inline VectorFamily family_from_json(const json& j, const std::string& path = "family") {
  if (!j.is_object()) detail::config_error(path, "expected an object");
  if (!j.contains("space")) detail::config_error(path + ".space", "missing");
  if (!j.contains("vectors")) detail::config_error(path + ".vectors", "missing");
  auto space = norm_spec_from_json(j["space"], path + ".space");
  auto vectors = detail::read_matrix(j["vectors"], path + ".vectors");
  try {
    return VectorFamily(space, vectors);
  } catch (const Error& e) {
    detail::config_error(path + ".vectors" + (e.index() ? "[" + std::to_string(*e.index() - 1) + "]" : ""), e.message());
  }
}

// --- nets -----------------------------------------------------------------

inline json to_json(const NetPoints& net) {
  return {{"theta", net.theta},
          {"points", net.points},
          {"separation_certified", net.separation_certified},
          {"covering_status", to_string(net.covering_status)},
          {"candidate_budget", net.candidate_budget}};
}

inline NetPoints net_from_json(const json& j, const std::string& path = "net") {
  if (!j.is_object()) detail::config_error(path, "expected an object");
  NetPoints net;
  if (!j.contains("theta")) detail::config_error(path + ".theta", "missing");
  net.theta = detail::read_number(j["theta"], path + ".theta");
  if (!j.contains("points")) detail::config_error(path + ".points", "missing");
  net.points = detail::read_matrix(j["points"], path + ".points");
  net.separation_certified = j.value("separation_certified", true);
  const auto status = j.value("covering_status", std::string("heuristic"));
  if (status == "certified-small-n") {
    net.covering_status = CoveringStatus::certified_small_n;
  } else if (status == "heuristic") {
    net.covering_status = CoveringStatus::heuristic;
  } else {
    detail::config_error(path + ".covering_status", "unknown status \"" + status + "\"");
  }
  net.candidate_budget = j.value("candidate_budget", std::size_t{0});
  return net;
}

// --- reports --------------------------------------------------------------

inline json to_json(const Extremum& e) {
  return {{"value", json_number(e.value)}, {"direction", e.direction}, {"method", to_string(e.method)}};
}

inline json to_json(const DistortionReport& r) {
  json j = {{"trial_seed", r.trial_seed},
            {"n", r.n},
            {"N", r.N},
            {"xi", r.xi},
            {"min_estimate", to_json(r.min)},
            {"max_estimate", to_json(r.max)},
            {"probe_min", json_number(r.probe_min)},
            {"samples_used", r.samples_used},
            {"uv",
             {{"sigma0", r.uv.sigma0},
              {"u_count", r.uv.u_count},
              {"v_count", r.uv.v_count},
              {"u_min", json_number(r.uv.u_min)},
              {"v_min", json_number(r.uv.v_min)},
              {"tentative", r.uv.tentative}}}};
  if (r.certified_upper) {
    j["certified_upper"] = {{"value", r.certified_upper->value},
                            {"covering_status", to_string(r.certified_upper->covering_status)}};
  } else {
    j["certified_upper"] = nullptr;
  }
  return j;
}

// --- schema validation ----------------------------------------------------

/// Validates `doc` against the subset of JSON Schema draft-07 used by the
/// shipped schemas: $ref (local "#/..." pointers), anyOf, type, properties,
/// required, additionalProperties (bool), items, enum, minimum,
/// exclusiveMinimum, maximum. Throws a config error naming the offending path.
inline void validate_against_schema(const json& doc, const json& schema, const std::string& path = "config",
                                    const json* root = nullptr) {
  if (!root) root = &schema;
  if (schema.contains("$ref")) {
    const auto ref = schema["$ref"].get<std::string>();
    if (ref.rfind("#", 0) != 0) detail::config_error(path, "unsupported schema reference " + ref);
    validate_against_schema(doc, root->at(json::json_pointer(ref.substr(1))), path, root);
    return;
  }
  if (schema.contains("anyOf")) {
    std::string reasons;
    bool ok = false;
    for (const auto& alt : schema["anyOf"]) {
      try {
        validate_against_schema(doc, alt, path, root);
        ok = true;
        break;
      } catch (const Error& e) {
        reasons += (reasons.empty() ? "" : "; ") + e.message();
      }
    }
    if (!ok) detail::config_error(path, "matches no allowed form (" + reasons + ")");
  }
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    auto matches = [&](const std::string& type) {
      if (type == "object") return doc.is_object();
      if (type == "array") return doc.is_array();
      if (type == "string") return doc.is_string();
      if (type == "boolean") return doc.is_boolean();
      if (type == "integer") return doc.is_number_integer();
      if (type == "number") return doc.is_number();
      if (type == "null") return doc.is_null();
      return false;
    };
    bool ok = false;
    std::string expected;
    if (t.is_array()) {
      for (const auto& alt : t) {
        ok = ok || matches(alt.get<std::string>());
        expected += (expected.empty() ? "" : " or ") + alt.get<std::string>();
      }
    } else {
      expected = t.get<std::string>();
      ok = matches(expected);
    }
    if (!ok) detail::config_error(path, "expected " + expected + ", got " + doc.type_name());
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& v : schema["enum"]) found = found || v == doc;
    if (!found) detail::config_error(path, "value " + doc.dump() + " is not one of " + schema["enum"].dump());
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) {
      detail::config_error(path, "must be >= " + schema["minimum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>()) {
      detail::config_error(path, "must be > " + schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) {
      detail::config_error(path, "must be <= " + schema["maximum"].dump());
    }
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) detail::config_error(path + "." + key.get<std::string>(), "missing");
      }
    }
    const json props = schema.value("properties", json::object());
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (props.contains(it.key())) {
        validate_against_schema(it.value(), props[it.key()], path + "." + it.key(), root);
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"].is_boolean() &&
                 !schema["additionalProperties"].get<bool>()) {
        detail::config_error(path + "." + it.key(), "unknown field");
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    for (std::size_t k = 0; k < doc.size(); ++k) {
      validate_against_schema(doc[k], schema["items"], path + "[" + std::to_string(k) + "]", root);
    }
  }
}

inline json read_json_file(const std::string& file, const std::string& path) {
  std::ifstream in(file);
  if (!in) detail::config_error(path, "cannot open file \"" + file + "\"");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    detail::config_error(path, "malformed JSON in \"" + file + "\": " + e.what());
  }
}

}  // namespace normlab
