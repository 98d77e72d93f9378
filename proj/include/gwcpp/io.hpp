#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwcpp/environment.hpp"
#include "gwcpp/errors.hpp"
#include "gwcpp/scalar.hpp"

namespace gwcpp {

/// Environment read from JSON. Probabilities may be numbers or exact strings
/// ("3/8", "0.125"); when every value is a string the exact environment is
/// also available.
struct parsed_environment {
  environment env;
  std::optional<exact_environment> exact;
};

namespace detail {

inline rational json_probability(const nlohmann::json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number()) return rational(v.get<double>());
  throw validation_error("probabilities must be numbers or strings");
}

inline bool all_strings(const nlohmann::json& law) {
  bool ok = true;
  for (const char* field : {"p", "r"}) {
    if (!law.contains(field)) continue;
    const auto& v = law[field];
    if (v.is_array()) {
      for (const auto& x : v) ok = ok && x.is_string();
    } else {
      ok = ok && v.is_string();
    }
  }
  return ok;
}

inline std::string entry_message(std::ptrdiff_t entry, const std::string& what) {
  std::ostringstream msg;
  msg << "laws[" << entry << "]: " << what;
  return msg.str();
}

}  // namespace detail

/// {"horizon": N, "laws": [{"type":"pmf","p":[...]} | {"type":"lf","r":..,"p":..}, ...]},
/// oldest generation (-N) first.
inline parsed_environment parse_environment(const nlohmann::json& doc) {
  if (!doc.is_object()) throw validation_error("environment must be a JSON object");
  if (!doc.contains("laws") || !doc["laws"].is_array()) throw validation_error("environment needs a \"laws\" array");
  const auto& laws = doc["laws"];
  if (laws.empty()) throw validation_error("environment needs at least one law");
  if (doc.contains("horizon")) {
    if (!doc["horizon"].is_number_integer() || doc["horizon"].get<long long>() != static_cast<long long>(laws.size()))
      throw validation_error("\"horizon\" must equal the number of laws");
  }
  bool exact = true;
  for (const auto& law : laws) exact = exact && law.is_object() && detail::all_strings(law);
  std::vector<offspring_law> doubles;
  std::vector<exact_offspring_law> rationals;
  for (std::size_t j = 0; j < laws.size(); ++j) {
    const auto entry = static_cast<std::ptrdiff_t>(j);
    const auto& law = laws[j];
    try {
      if (!law.is_object() || !law.contains("type") || !law["type"].is_string())
        throw validation_error("law needs a \"type\"");
      const std::string type = law["type"].get<std::string>();
      if (type == "pmf") {
        if (!law.contains("p") || !law["p"].is_array()) throw validation_error("pmf law needs a \"p\" array");
        std::vector<rational> probs;
        std::vector<double> approx;
        for (const auto& v : law["p"]) {
          probs.push_back(detail::json_probability(v));
          approx.push_back(to_double(probs.back()));
        }
        doubles.push_back(offspring_law::finite(approx));
        if (exact) rationals.push_back(exact_offspring_law::finite(probs));
      } else if (type == "lf") {
        if (!law.contains("r") || !law.contains("p")) throw validation_error("lf law needs \"r\" and \"p\"");
        const rational r = detail::json_probability(law["r"]);
        const rational p = detail::json_probability(law["p"]);
        doubles.push_back(offspring_law::linear_fractional_law(to_double(r), to_double(p)));
        if (exact) rationals.push_back(exact_offspring_law::linear_fractional_law(r, p));
      } else {
        throw validation_error("unknown law type \"" + type + "\"");
      }
    } catch (const validation_error& e) {
      throw validation_error(detail::entry_message(entry, e.what()), entry);
    } catch (const nlohmann::json::exception& e) {
      throw validation_error(detail::entry_message(entry, e.what()), entry);
    }
  }
  parsed_environment out{environment(std::move(doubles)), std::nullopt};
  if (exact) out.exact.emplace(std::move(rationals));
  return out;
}

inline parsed_environment parse_environment_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("environment is not valid JSON: ") + e.what());
  }
  return parse_environment(doc);
}

inline parsed_environment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open environment file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_environment_text(buffer.str());
}

/// Canonical JSON dump (doubles at full precision).
inline nlohmann::json environment_to_json(const environment& env) {
  nlohmann::json laws = nlohmann::json::array();
  for (const auto& law : env.laws()) {
    if (law.is_linear_fractional()) {
      laws.push_back({{"type", "lf"}, {"r", law.as_linear_fractional().r}, {"p", law.as_linear_fractional().p}});
    } else {
      laws.push_back({{"type", "pmf"}, {"p", law.as_finite().probs}});
    }
  }
  return {{"horizon", env.horizon()}, {"laws", laws}};
}

/// FNV-1a 64-bit hash of the canonical dump, as 16 hex digits.
inline std::string environment_digest(const environment& env) {
  const std::string text = environment_to_json(env).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

/// Keeps the most recent n generations.
template <class Real>
basic_environment<Real> override_horizon(const basic_environment<Real>& env, int n) {
  if (n < 1 || n > env.horizon()) {
    std::ostringstream msg;
    msg << "horizon override " << n << " outside [1, " << env.horizon() << "]";
    throw validation_error(msg.str());
  }
  return restrict_to_depth(env, n);
}

}  // namespace gwcpp
