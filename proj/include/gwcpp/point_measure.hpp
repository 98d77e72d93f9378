#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwcpp/errors.hpp"

namespace gwcpp {

/// Finite point measure sum_n b(n) delta_n on {1, 2, ...}, stored as sorted
/// (position, multiplicity) pairs with multiplicities >= 1.
class point_measure {
 public:
  using atom = std::pair<int, int>;

  point_measure() = default;

  static point_measure delta(int position, int multiplicity = 1) {
    point_measure b;
    b.add(position, multiplicity);
    return b;
  }

  bool is_null() const { return atoms_.empty(); }
  const std::vector<atom>& atoms() const { return atoms_; }

  int mass_at(int position) const {
    for (const auto& [n, m] : atoms_)
      if (n == position) return m;
    return 0;
  }

  /// Smallest position carrying mass; nullopt stands for +infinity.
  std::optional<int> min_support() const {
    if (atoms_.empty()) return std::nullopt;
    return atoms_.front().first;
  }

  /// b* = b - delta_{min support}; the null measure is left unchanged.
  point_measure star() const {
    point_measure out = *this;
    if (out.atoms_.empty()) return out;
    if (--out.atoms_.front().second == 0) out.atoms_.erase(out.atoms_.begin());
    return out;
  }

  void add(int position, int multiplicity) {
    if (position < 1) throw range_error("point measure positions start at 1");
    if (multiplicity == 0) return;
    if (multiplicity < 0) throw range_error("point measure multiplicities are positive");
    auto it = atoms_.begin();
    while (it != atoms_.end() && it->first < position) ++it;
    if (it != atoms_.end() && it->first == position) {
      it->second += multiplicity;
    } else {
      atoms_.insert(it, {position, multiplicity});
    }
  }

  /// "0" for the null measure, otherwise e.g. "d1+2d2".
  std::string to_string() const {
    if (atoms_.empty()) return "0";
    std::string out;
    for (const auto& [n, m] : atoms_) {
      if (!out.empty()) out += '+';
      if (m != 1) out += std::to_string(m);
      out += 'd';
      out += std::to_string(n);
    }
    return out;
  }

  friend bool operator==(const point_measure&, const point_measure&) = default;
  friend auto operator<=>(const point_measure&, const point_measure&) = default;

 private:
  std::vector<atom> atoms_;
};

/// One step of the point-measure recursion:
///   next = b* + d delta_A   if A != s(b) and A < s(b*),
///   next = b*               otherwise,
/// where A = `next_coalescence` (nullopt = infinity) and d = D_{i+1}(A).
inline point_measure btilde_next(const point_measure& current, std::optional<int> next_coalescence,
                                 int mass_at_coalescence) {
  point_measure next = current.star();
  if (!next_coalescence) return next;
  const auto s_current = current.min_support();
  const auto s_star = next.min_support();
  const bool differs = !s_current || *s_current != *next_coalescence;
  const bool below = !s_star || *next_coalescence < *s_star;
  if (differs && below) next.add(*next_coalescence, mass_at_coalescence);
  return next;
}

}  // namespace gwcpp
