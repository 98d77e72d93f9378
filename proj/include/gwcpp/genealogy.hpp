#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gwcpp/environment.hpp"
#include "gwcpp/errors.hpp"
#include "gwcpp/pgf.hpp"
#include "gwcpp/point_measure.hpp"
#include "gwcpp/random.hpp"

namespace gwcpp {

/// Realization of the coalescent point process: K present-day individuals
/// and the coalescence times A_1, ..., A_{K-1} of consecutive individuals.
struct coalescent_point_process {
  int survivors = 0;
  std::vector<int> times;

  friend bool operator==(const coalescent_point_process&, const coalescent_point_process&) = default;
};

/// Pairwise coalescence times C_{i,j}, 1 <= i < j <= K.
class coalescence_table {
 public:
  explicit coalescence_table(int survivors = 0)
      : k_(survivors), cells_(static_cast<std::size_t>(survivors) * static_cast<std::size_t>(survivors), 0) {}

  int survivors() const { return k_; }

  int at(int i, int j) const { return cells_[index(i, j)]; }
  void set(int i, int j, int value) { cells_[index(i, j)] = value; }

  friend bool operator==(const coalescence_table&, const coalescence_table&) = default;

 private:
  std::size_t index(int i, int j) const {
    if (i < 1 || j > k_ || i >= j) throw range_error("coalescence table needs 1 <= i < j <= K");
    return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(j - 1);
  }

  int k_;
  std::vector<int> cells_;
};

/// Planar rooted tree with founder at generation -N, stored generation by
/// generation in planar (left to right) order. Children of an individual are
/// contiguous on the next level, following the mother rule: individual (m, i)
/// is a daughter of (m-1, j) iff sum_{k<j} xi_k < i <= sum_{k<=j} xi_k.
///
/// Depth d (0 <= d <= N) holds generation -N + d. Individuals at depth N are
/// the present generation; indices inside a level are 0-based here and ranks
/// exposed through the free functions are 1-based.
class tree {
 public:
  /// counts[d][i] is the number of children of individual i at depth d, for
  /// d = 0..N-1. Level 0 must hold exactly the founder.
  static tree from_child_counts(std::vector<std::vector<std::uint32_t>> counts) {
    if (counts.empty()) throw validation_error("tree needs a horizon of at least one generation");
    if (counts.front().size() != 1) throw validation_error("level 0 must contain only the founder");
    tree t;
    t.horizon_ = static_cast<int>(counts.size());
    t.counts_ = std::move(counts);
    t.first_.resize(t.counts_.size());
    t.parent_.resize(t.counts_.size() + 1);
    for (std::size_t d = 0; d < t.counts_.size(); ++d) {
      auto& first = t.first_[d];
      first.assign(t.counts_[d].size() + 1, 0);
      for (std::size_t i = 0; i < t.counts_[d].size(); ++i) first[i + 1] = first[i] + t.counts_[d][i];
      const std::size_t next_size = d + 1 < t.counts_.size() ? t.counts_[d + 1].size() : first.back();
      if (first.back() != next_size) {
        std::ostringstream msg;
        msg << "level " << d << " has " << first.back() << " children but level " << d + 1 << " holds " << next_size;
        throw validation_error(msg.str());
      }
      auto& parent = t.parent_[d + 1];
      parent.resize(first.back());
      for (std::size_t i = 0; i < t.counts_[d].size(); ++i)
        for (std::size_t c = first[i]; c < first[i + 1]; ++c) parent[c] = static_cast<std::uint32_t>(i);
    }
    t.leaves_.resize(t.counts_.size() + 1);
    const std::size_t k = t.level_size(t.horizon_);
    auto& bottom = t.leaves_.back();
    bottom.resize(k + 1);
    for (std::size_t i = 0; i <= k; ++i) bottom[i] = static_cast<std::uint32_t>(i);
    for (int d = t.horizon_ - 1; d >= 0; --d) {
      const auto& first = t.first_[static_cast<std::size_t>(d)];
      const auto& below = t.leaves_[static_cast<std::size_t>(d) + 1];
      auto& here = t.leaves_[static_cast<std::size_t>(d)];
      here.resize(first.size());
      for (std::size_t i = 0; i < first.size(); ++i) here[i] = below[first[i]];
    }
    return t;
  }

  int horizon() const { return horizon_; }

  std::size_t level_size(int depth) const {
    check_depth(depth);
    if (depth == 0) return 1;
    return first_[static_cast<std::size_t>(depth) - 1].back();
  }

  /// Number of present-day individuals, K.
  int survivors() const { return static_cast<int>(level_size(horizon_)); }

  std::size_t node_count() const {
    std::size_t total = 0;
    for (int d = 0; d <= horizon_; ++d) total += level_size(d);
    return total;
  }

  /// Present-day individuals carry no recorded offspring.
  std::uint32_t child_count(int depth, std::size_t i) const {
    check_node(depth, i);
    if (depth == horizon_) return 0;
    return counts_[static_cast<std::size_t>(depth)][i];
  }

  std::size_t first_child(int depth, std::size_t i) const {
    check_node(depth, i);
    if (depth == horizon_) throw range_error("present-day individuals have no children");
    return first_[static_cast<std::size_t>(depth)][i];
  }

  std::size_t parent(int depth, std::size_t i) const {
    check_node(depth, i);
    if (depth == 0) throw range_error("the founder has no parent");
    return parent_[static_cast<std::size_t>(depth)][i];
  }

  /// Half-open range of present-day descendants (0-based leaf indices).
  std::pair<std::size_t, std::size_t> leaf_range(int depth, std::size_t i) const {
    check_node(depth, i);
    const auto& leaves = leaves_[static_cast<std::size_t>(depth)];
    return {leaves[i], leaves[i + 1]};
  }

  bool survives(int depth, std::size_t i) const {
    auto [lo, hi] = leaf_range(depth, i);
    return hi > lo;
  }

 private:
  void check_depth(int depth) const {
    if (depth < 0 || depth > horizon_) throw range_error("depth outside the tree");
  }
  void check_node(int depth, std::size_t i) const {
    if (i >= level_size(depth)) throw range_error("individual index outside its generation");
  }

  int horizon_ = 0;
  std::vector<std::vector<std::uint32_t>> counts_;
  std::vector<std::vector<std::uint32_t>> first_;
  std::vector<std::vector<std::uint32_t>> parent_;
  std::vector<std::vector<std::uint32_t>> leaves_;
};

struct simulation_options {
  /// Abort a realization that grows beyond this many individuals.
  std::size_t max_nodes = 50'000'000;
};

/// Per-generation offspring samplers for an environment.
class environment_sampler {
 public:
  explicit environment_sampler(const environment& env) {
    for (const auto& law : env.laws()) samplers_.emplace_back(law);
  }
  int horizon() const { return static_cast<int>(samplers_.size()); }
  /// Offspring count of an individual at depth d (generation -N + d).
  int draw(int depth, engine& gen) const { return samplers_[static_cast<std::size_t>(depth)](gen); }

 private:
  std::vector<offspring_sampler> samplers_;
};

/// Forward simulation of the planar tree, one generation at a time.
inline tree simulate_tree(const environment_sampler& sampler, engine& gen, const simulation_options& options = {}) {
  std::vector<std::vector<std::uint32_t>> counts(static_cast<std::size_t>(sampler.horizon()));
  std::size_t current = 1;
  std::size_t total = 1;
  for (int d = 0; d < sampler.horizon(); ++d) {
    auto& level = counts[static_cast<std::size_t>(d)];
    level.resize(current);
    std::size_t next = 0;
    for (std::size_t i = 0; i < current; ++i) {
      const int c = sampler.draw(d, gen);
      level[i] = static_cast<std::uint32_t>(c);
      next += static_cast<std::size_t>(c);
    }
    total += next;
    if (total > options.max_nodes) throw capacity_error("simulated tree exceeds the node budget");
    current = next;
  }
  return tree::from_child_counts(std::move(counts));
}

inline tree simulate_tree(const environment& env, engine& gen, const simulation_options& options = {}) {
  return simulate_tree(environment_sampler(env), gen, options);
}

struct conditioned_tree {
  gwcpp::tree tree;
  int attempts = 0;
};

/// Rejection sampling until at least one present-day individual exists.
inline conditioned_tree condition_on_survival(const environment_sampler& sampler, engine& gen, int max_attempts,
                                              const simulation_options& options = {}) {
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    tree t = simulate_tree(sampler, gen, options);
    if (t.survivors() > 0) return {std::move(t), attempt};
  }
  std::ostringstream msg;
  msg << "no surviving realization within " << max_attempts << " attempts";
  throw attempt_cap_exceeded(msg.str());
}

inline conditioned_tree condition_on_survival(const environment& env, engine& gen, int max_attempts = 1'000'000,
                                              const simulation_options& options = {}) {
  if (!(survival_prob(env, env.horizon()) > 0.0))
    throw degenerate_error("the founder cannot leave present-day descendants");
  return condition_on_survival(environment_sampler(env), gen, max_attempts, options);
}

namespace detail {

inline void check_leaf(const tree& t, int i) {
  if (i < 1 || i > t.survivors()) {
    std::ostringstream msg;
    msg << "individual " << i << " outside [1, " << t.survivors() << "]";
    throw range_error(msg.str());
  }
}

inline void check_depth(const tree& t, int n) {
  if (n < 1 || n > t.horizon()) {
    std::ostringstream msg;
    msg << "generation -" << n << " outside the horizon " << t.horizon();
    throw range_error(msg.str());
  }
}

/// 0-based index of the ancestor of leaf i (1-based) at generation -n.
inline std::size_t ancestor_slot(const tree& t, int i, int n) {
  std::size_t node = static_cast<std::size_t>(i - 1);
  for (int d = t.horizon(); d > t.horizon() - n; --d) node = t.parent(d, node);
  return node;
}

}  // namespace detail

/// Planar rank (1-based) at generation -n of the ancestor of individual i.
inline int ancestor_index(const tree& t, int i, int n) {
  detail::check_leaf(t, i);
  detail::check_depth(t, n);
  return static_cast<int>(detail::ancestor_slot(t, i, n)) + 1;
}

/// A_i = min{n >= 1 : a_i(n) = a_{i+1}(n)} for i = 1..K-1.
inline coalescent_point_process coalescent_times(const tree& t) {
  coalescent_point_process cpp;
  cpp.survivors = t.survivors();
  for (int i = 1; i < cpp.survivors; ++i) {
    std::size_t a = static_cast<std::size_t>(i - 1);
    std::size_t b = static_cast<std::size_t>(i);
    int n = 0;
    int depth = t.horizon();
    while (a != b) {
      a = t.parent(depth, a);
      b = t.parent(depth, b);
      --depth;
      ++n;
    }
    cpp.times.push_back(n);
  }
  return cpp;
}

/// D_i(n): daughters of the generation -n ancestor of individual i having
/// present-day descendants of rank >= i, minus one.
inline int extract_d(const tree& t, int i, int n) {
  detail::check_leaf(t, i);
  detail::check_depth(t, n);
  const int depth = t.horizon() - n;
  const std::size_t node = detail::ancestor_slot(t, i, n);
  const std::size_t begin = t.first_child(depth, node);
  const std::size_t end = begin + t.child_count(depth, node);
  int count = 0;
  for (std::size_t c = begin; c < end; ++c) {
    auto [lo, hi] = t.leaf_range(depth + 1, c);
    if (hi > lo && hi > static_cast<std::size_t>(i - 1)) ++count;
  }
  return count - 1;
}

/// (D_i(1), ..., D_i(N)).
inline std::vector<int> extract_d_vector(const tree& t, int i) {
  std::vector<int> d;
  for (int n = 1; n <= t.horizon(); ++n) d.push_back(extract_d(t, i, n));
  return d;
}

/// B_i = (D_i(1), ..., D_i(l_i)) with l_i = C_{1,i+1} = max(A_1, ..., A_i).
/// For i = K (no individual i+1) the length is capped at the horizon.
inline std::vector<int> extract_b(const tree& t, int i) {
  detail::check_leaf(t, i);
  int length = t.horizon();
  if (i < t.survivors()) {
    const auto cpp = coalescent_times(t);
    length = *std::max_element(cpp.times.begin(), cpp.times.begin() + i);
  }
  std::vector<int> b;
  for (int n = 1; n <= length; ++n) b.push_back(extract_d(t, i, n));
  return b;
}

/// The point-measure sequence B~_1, ..., B~_{K-1} driven by (A_i, D_i(A_i)).
inline std::vector<point_measure> extract_btilde(const tree& t) {
  std::vector<point_measure> out;
  const auto cpp = coalescent_times(t);
  point_measure current;
  for (int i = 1; i < cpp.survivors; ++i) {
    const int a = cpp.times[static_cast<std::size_t>(i - 1)];
    current = btilde_next(current, a, extract_d(t, i, a));
    out.push_back(current);
  }
  return out;
}

/// C_{i,j} = max(A_i, ..., A_{j-1}).
inline coalescence_table genealogy_from_cpp(const coalescent_point_process& cpp) {
  if (cpp.survivors < 0 || (cpp.survivors > 0 && static_cast<int>(cpp.times.size()) != cpp.survivors - 1))
    throw validation_error("coalescent point process needs K-1 coalescence times");
  coalescence_table table(cpp.survivors);
  for (int i = 1; i <= cpp.survivors; ++i) {
    int running = 0;
    for (int j = i + 1; j <= cpp.survivors; ++j) {
      running = std::max(running, cpp.times[static_cast<std::size_t>(j - 2)]);
      table.set(i, j, running);
    }
  }
  return table;
}

/// C_{i,j} straight from ancestor indices.
inline coalescence_table coalescence_from_tree(const tree& t) {
  coalescence_table table(t.survivors());
  for (int i = 1; i <= t.survivors(); ++i)
    for (int j = i + 1; j <= t.survivors(); ++j) {
      int n = 1;
      while (detail::ancestor_slot(t, i, n) != detail::ancestor_slot(t, j, n)) ++n;
      table.set(i, j, n);
    }
  return table;
}

/// Reduced planar tree (surviving lineages only) realizing a coalescent point
/// process under a founder at generation -horizon.
inline tree tree_from_cpp(const coalescent_point_process& cpp, int horizon) {
  if (cpp.survivors < 1) throw validation_error("a reduced tree needs at least one survivor");
  if (static_cast<int>(cpp.times.size()) != cpp.survivors - 1)
    throw validation_error("coalescent point process needs K-1 coalescence times");
  for (int a : cpp.times)
    if (a < 1 || a > horizon) throw validation_error("coalescence time outside [1, horizon]");
  std::vector<std::pair<int, int>> level{{0, cpp.survivors}};
  std::vector<std::vector<std::uint32_t>> counts;
  for (int d = 0; d < horizon; ++d) {
    const int h = horizon - d;
    std::vector<std::pair<int, int>> next;
    std::vector<std::uint32_t> row;
    for (auto [lo, hi] : level) {
      std::uint32_t children = 0;
      int start = lo;
      for (int leaf = lo; leaf < hi; ++leaf) {
        if (leaf + 1 == hi || cpp.times[static_cast<std::size_t>(leaf)] == h) {
          next.emplace_back(start, leaf + 1);
          ++children;
          start = leaf + 1;
        }
      }
      row.push_back(children);
    }
    counts.push_back(std::move(row));
    level = std::move(next);
  }
  return tree::from_child_counts(std::move(counts));
}

/// One line per individual in Ulam-Harris lexicographic order:
/// "label child_count survives_flag", the founder labeled "()".
inline void dump_tree(const tree& t, std::ostream& out) {
  std::vector<int> label;
  auto visit = [&](auto&& self, int depth, std::size_t node) -> void {
    out << '(';
    for (std::size_t k = 0; k < label.size(); ++k) out << (k ? "," : "") << label[k];
    out << ") " << t.child_count(depth, node) << ' ' << (t.survives(depth, node) ? 1 : 0) << '\n';
    if (depth == t.horizon()) return;
    const std::size_t begin = t.first_child(depth, node);
    for (std::uint32_t c = 0; c < t.child_count(depth, node); ++c) {
      label.push_back(static_cast<int>(c) + 1);
      self(self, depth + 1, begin + c);
      label.pop_back();
    }
  };
  visit(visit, 0, 0);
}

}  // namespace gwcpp
