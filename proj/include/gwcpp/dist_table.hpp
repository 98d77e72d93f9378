#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gwcpp/errors.hpp"
#include "gwcpp/scalar.hpp"

namespace gwcpp {

/// "K=3;A=1,2". With `lumped` set the key reads "K>=C;A=..." and carries
/// only the first C-1 coalescence times.
inline std::string encode_outcome(int survivors, const std::vector<int>& times, bool lumped = false) {
  std::ostringstream out;
  out << (lumped ? "K>=" : "K=") << survivors << ";A=";
  for (std::size_t k = 0; k < times.size(); ++k) out << (k ? "," : "") << times[k];
  return out.str();
}

/// "b=v1,v2,..." for a chain state.
inline std::string encode_entries(const std::vector<int>& entries) {
  std::ostringstream out;
  out << "b=";
  for (std::size_t k = 0; k < entries.size(); ++k) out << (k ? "," : "") << entries[k];
  return out.str();
}

/// Finite probability table keyed by canonical outcome strings. `residual`
/// bounds the probability mass the table does not account for (truncation of
/// unbounded laws); it is 0 for complete tables.
template <class Real>
struct basic_dist_table {
  std::map<std::string, Real> probs;
  double residual = 0.0;

  void add(const std::string& key, const Real& p) {
    if (p == Real(0)) return;
    auto [it, inserted] = probs.try_emplace(key, p);
    if (!inserted) it->second += p;
  }

  Real prob(const std::string& key) const {
    auto it = probs.find(key);
    return it == probs.end() ? Real(0) : it->second;
  }

  Real total() const {
    Real t(0);
    for (const auto& [k, p] : probs) t += p;
    return t;
  }

  template <class To>
  basic_dist_table<To> convert() const {
    basic_dist_table<To> out;
    out.residual = residual;
    for (const auto& [k, p] : probs) out.probs.emplace(k, convert_scalar<To>(p));
    return out;
  }

  /// Divides every entry by `mass` (conditioning).
  void scale_down(const Real& mass) {
    if (!(mass > Real(0))) throw degenerate_error("cannot condition on an event of probability zero");
    for (auto& [k, p] : probs) p /= mass;
  }
};

using dist_table = basic_dist_table<double>;
using exact_dist_table = basic_dist_table<rational>;

/// (1/2) sum |a - b|, missing keys counting as mass 0.
template <class Real>
Real tv_distance(const basic_dist_table<Real>& a, const basic_dist_table<Real>& b) {
  std::set<std::string> keys;
  for (const auto& [k, p] : a.probs) keys.insert(k);
  for (const auto& [k, p] : b.probs) keys.insert(k);
  Real sum(0);
  for (const auto& k : keys) sum += abs_value(Real(a.prob(k) - b.prob(k)));
  return sum / Real(2);
}

/// Parses a key produced by encode_outcome.
struct decoded_outcome {
  int survivors = 0;
  bool lumped = false;
  std::vector<int> times;
};

inline decoded_outcome decode_outcome(const std::string& key) {
  decoded_outcome out;
  const auto semi = key.find(";A=");
  if (key.rfind("K", 0) != 0 || semi == std::string::npos) throw validation_error("malformed outcome key '" + key + "'");
  std::string k = key.substr(1, semi - 1);
  if (k.rfind(">=", 0) == 0) {
    out.lumped = true;
    k = k.substr(2);
  } else if (k.rfind("=", 0) == 0) {
    k = k.substr(1);
  } else {
    throw validation_error("malformed outcome key '" + key + "'");
  }
  out.survivors = std::stoi(k);
  std::stringstream rest(key.substr(semi + 3));
  std::string item;
  while (std::getline(rest, item, ','))
    if (!item.empty()) out.times.push_back(std::stoi(item));
  return out;
}

}  // namespace gwcpp
