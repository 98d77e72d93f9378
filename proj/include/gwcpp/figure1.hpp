#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "gwcpp/chains.hpp"
#include "gwcpp/genealogy.hpp"
#include "gwcpp/point_measure.hpp"

namespace gwcpp {

/// Worked example: a tree with twelve present-day individuals and founder at
/// generation -5, given by its B table.
namespace figure1 {

inline constexpr int horizon = 5;

inline const std::vector<std::vector<int>>& b_rows() {
  static const std::vector<std::vector<int>> rows{
      {1},       {0, 2},       {1, 1},       {0, 1},          {2, 0},          {1, 0},
      {0, 0, 0, 1}, {0, 0, 1, 0}, {0, 0, 0, 0, 1}, {1, 0, 0, 1, 0}, {0, 0, 0, 1, 0}};
  return rows;
}

inline const std::vector<int>& a_row() {
  static const std::vector<int> a{1, 2, 1, 2, 1, 1, 4, 3, 5, 1, 4};
  return a;
}

/// B~_1, ..., B~_11 as listed in the worked example.
inline const std::vector<point_measure>& btilde_row() {
  static const std::vector<point_measure> rows = [] {
    auto d = [](int n, int m = 1) { return point_measure::delta(n, m); };
    point_measure d1d2 = d(1);
    d1d2.add(2, 1);
    return std::vector<point_measure>{d(1), d(2, 2), d1d2, d(2), d(1, 2), d(1), d(4), d(3), d(5), d(1), d(4)};
  }();
  return rows;
}

}  // namespace figure1

struct figure1_report {
  bool pass = true;
  std::vector<int> derived_a;
  std::vector<int> derived_l;
  std::vector<point_measure> derived_btilde;
  std::vector<std::string> mismatches;
};

/// A_i = s(B_i) and l_i = length(B_i) = l_{i-1} v A_i from the embedded rows;
/// the B~ recursion driven by (A_i, B_i(A_i)); the reduced tree rebuilt from A
/// must give back the whole B table.
inline figure1_report figure1_consistency() {
  figure1_report report;
  const auto& rows = figure1::b_rows();
  auto fail = [&](const std::string& what, std::size_t index) {
    std::ostringstream msg;
    msg << what << " differs at index " << index + 1;
    report.mismatches.push_back(msg.str());
    report.pass = false;
  };
  int running = 0;
  point_measure current;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int a = *first_nonzero(rows[i]);
    report.derived_a.push_back(a);
    running = std::max(running, a);
    report.derived_l.push_back(running);
    if (static_cast<int>(rows[i].size()) != running) fail("l_i vs row length", i);
    current = btilde_next(current, a, rows[i][static_cast<std::size_t>(a - 1)]);
    report.derived_btilde.push_back(current);
  }
  const auto& a_row = figure1::a_row();
  for (std::size_t i = 0; i < a_row.size(); ++i)
    if (report.derived_a[i] != a_row[i]) {
      fail("A", i);
      break;
    }
  const auto& bt = figure1::btilde_row();
  for (std::size_t i = 0; i < bt.size(); ++i)
    if (report.derived_btilde[i] != bt[i]) {
      fail("B~", i);
      break;
    }
  const coalescent_point_process cpp{static_cast<int>(a_row.size()) + 1, a_row};
  const tree t = tree_from_cpp(cpp, figure1::horizon);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (extract_b(t, static_cast<int>(i) + 1) != rows[i]) {
      fail("B from the rebuilt tree", i);
      break;
    }
  if (coalescent_times(t) != cpp) fail("A from the rebuilt tree", 0);
  return report;
}

}  // namespace gwcpp
