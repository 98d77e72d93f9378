#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gwcpp/dist_table.hpp"
#include "gwcpp/environment.hpp"
#include "gwcpp/errors.hpp"
#include "gwcpp/eta_law.hpp"
#include "gwcpp/genealogy.hpp"
#include "gwcpp/pgf.hpp"

namespace gwcpp {

struct enumeration_options {
  /// Outcomes with K >= max_individuals are lumped into "K>=C;A=A_1..A_{C-1}".
  /// 0 keeps every K (only possible when all supports are bounded).
  int max_individuals = 0;
  /// Largest horizon accepted by the enumerators.
  int max_horizon = 3;
  /// Unbounded offspring laws are cut where P(xi > J) drops below this.
  double truncation = 1e-16;
  /// Budget on enumerated trees or simultaneously tracked states.
  std::size_t max_states = 5'000'000;
};

namespace detail {

inline void check_enumerable(int horizon, const enumeration_options& options) {
  if (horizon > options.max_horizon) {
    std::ostringstream msg;
    msg << "horizon " << horizon << " exceeds the enumeration limit " << options.max_horizon;
    throw enumeration_guard(msg.str());
  }
}

inline void check_budget(std::size_t states, const enumeration_options& options) {
  if (states > options.max_states) {
    std::ostringstream msg;
    msg << "enumeration needs more than " << options.max_states << " states";
    throw enumeration_guard(msg.str());
  }
}

inline std::string capped_key(int survivors, const std::vector<int>& times, int cap) {
  if (cap > 0 && survivors >= cap) {
    return encode_outcome(cap, std::vector<int>(times.begin(), times.begin() + (cap - 1)), true);
  }
  return encode_outcome(survivors, times);
}

/// Partial genealogy of a subtree: leaf count k and the coalescence times
/// among its leaves, lumped once k reaches the cap. Stored as
/// [k, lumped, A_1, A_2, ...].
using subtree_outcome = std::vector<int>;

inline subtree_outcome concat(const subtree_outcome& left, const subtree_outcome& right, int separator, int cap) {
  if (right[0] == 0) return left;
  if (left[0] == 0) return right;
  if (left[1] == 1) return left;
  subtree_outcome out;
  out.reserve(left.size() + right.size());
  out.push_back(left[0] + right[0]);
  out.push_back(0);
  out.insert(out.end(), left.begin() + 2, left.end());
  out.push_back(separator);
  out.insert(out.end(), right.begin() + 2, right.end());
  if (cap > 0 && out[0] >= cap) {
    out[0] = cap;
    out[1] = 1;
    out.resize(static_cast<std::size_t>(cap) + 1);
  }
  return out;
}

}  // namespace detail

/// Exact law of (K, A) over all planar trees, conditioned on K >= 1, by
/// brute-force enumeration of every child-count assignment. Finite-support
/// environments only. Each tree is built and read off with the same tree
/// code the simulator uses.
template <class Real>
basic_dist_table<Real> enumerate_tree_law(const basic_environment<Real>& env, const enumeration_options& options = {}) {
  detail::check_enumerable(env.horizon(), options);
  if (!env.is_finite_support()) throw validation_error("tree enumeration needs finite-support laws");
  basic_dist_table<Real> table;
  Real extinct(0);
  std::size_t visited = 0;
  std::vector<std::vector<std::uint32_t>> counts;

  auto level = [&](auto&& self, int depth, std::size_t size, const Real& weight) -> void {
    if (depth == env.horizon()) {
      detail::check_budget(++visited, options);
      const tree t = tree::from_child_counts(counts);
      if (t.survivors() == 0) {
        extinct += weight;
        return;
      }
      const auto cpp = coalescent_times(t);
      table.add(detail::capped_key(cpp.survivors, cpp.times, options.max_individuals), weight);
      return;
    }
    const auto& probs = env.slot(static_cast<std::size_t>(depth)).as_finite().probs;
    std::vector<std::uint32_t> row(size, 0);
    for (;;) {
      Real w = weight;
      std::size_t children = 0;
      for (auto c : row) {
        w *= probs[c];
        children += c;
      }
      if (w != Real(0)) {
        counts.push_back(row);
        self(self, depth + 1, children, w);
        counts.pop_back();
      }
      std::size_t k = 0;
      while (k < size && row[k] + 1 == probs.size()) row[k++] = 0;
      if (k == size) break;
      ++row[k];
    }
  };
  level(level, 0, 1, Real(1));
  table.scale_down(Real(Real(1) - extinct));
  return table;
}

/// Exact law of (K, A) conditioned on K >= 1 by dynamic programming over
/// subtrees: the genealogy of a subtree rooted at depth d is the concatenation
/// of its children's genealogies, consecutive non-empty blocks separated by a
/// coalescence at d. Unbounded laws are truncated; the lost mass, relative to
/// P(K >= 1), is reported as the table residual.
template <class Real>
basic_dist_table<Real> subtree_tree_law(const basic_environment<Real>& env, const enumeration_options& options = {}) {
  detail::check_enumerable(env.horizon(), options);
  const int cap = options.max_individuals;
  if (cap == 0 && !env.max_offspring()) throw validation_error("unbounded offspring laws need a max_individuals cap");
  using law_map = std::map<detail::subtree_outcome, Real>;
  law_map below{{{1, 0}, Real(1)}};
  for (int d = 1; d <= env.horizon(); ++d) {
    const auto& law = env.law_at_depth(d);
    int top;
    if (auto m = law.max_offspring()) {
      top = *m;
    } else {
      top = 0;
      while (!(to_double(law.tail(top)) < options.truncation)) ++top;
    }
    law_map here;
    law_map block{{{0, 0}, Real(1)}};
    for (int j = 0; j <= top; ++j) {
      if (j > 0) {
        law_map next;
        for (const auto& [left, pl] : block)
          for (const auto& [right, pr] : below) {
            auto [it, inserted] = next.try_emplace(detail::concat(left, right, d, cap), pl * pr);
            if (!inserted) it->second += pl * pr;
          }
        detail::check_budget(next.size(), options);
        block = std::move(next);
      }
      const Real pj = law.pmf(j);
      if (pj == Real(0)) continue;
      for (const auto& [o, p] : block) here[o] += pj * p;
    }
    below = std::move(here);
  }
  basic_dist_table<Real> table;
  Real alive(0);
  Real covered(0);
  for (const auto& [o, p] : below) {
    covered += p;
    if (o[0] == 0) continue;
    alive += p;
    std::vector<int> times(o.begin() + 2, o.end());
    table.add(o[1] ? encode_outcome(o[0], times, true) : encode_outcome(o[0], times), p);
  }
  table.scale_down(alive);
  const double lost = std::max(0.0, 1.0 - to_double(covered));
  table.residual = lost / to_double(alive);
  return table;
}

/// Exact law of (K, A) over trees: full enumeration for finite-support
/// environments without a cap, the subtree recursion otherwise.
template <class Real>
basic_dist_table<Real> exact_tree_law(const basic_environment<Real>& env, const enumeration_options& options = {}) {
  if (env.is_finite_support() && options.max_individuals == 0) return enumerate_tree_law(env, options);
  return subtree_tree_law(env, options);
}

namespace detail {

/// Values of eta^{(-m)} relevant for an entry that must stay meaningful for
/// `cap` more steps: 0..cap-1 exactly and a bucket "cap" with P(eta >= cap).
/// cap < 0 means no bucketing (bounded laws only).
template <class Real>
std::vector<std::pair<int, Real>> eta_outcomes(const basic_eta_law<Real>& law, int cap) {
  std::vector<std::pair<int, Real>> out;
  if (cap < 0) {
    const auto top = law.max_value();
    if (!top) throw validation_error("unbounded eta law needs a max_individuals cap");
    for (int v = 0; v <= *top; ++v)
      if (law.prob(v) != Real(0)) out.emplace_back(v, law.prob(v));
    return out;
  }
  for (int v = 0; v < cap; ++v)
    if (law.prob(v) != Real(0)) out.emplace_back(v, law.prob(v));
  const Real rest = law.tail_from(cap);
  if (rest != Real(0)) out.emplace_back(cap, rest);
  return out;
}

/// Enumerates the B transition from (b, prefix length l) with every eta draw
/// expanded into its outcomes. `emit(next, prob)` receives the new state or
/// an empty vector for termination. Entries are capped at `cap` (cap < 0: no
/// capping).
template <class Real, class Emit>
void expand_b_transition(const std::vector<int>& b, int horizon, const std::vector<basic_eta_law<Real>>& eta, int cap,
                         Emit&& emit) {
  const int length = static_cast<int>(b.size());
  std::vector<int> next = b;
  int a = length + 1;
  for (int m = 1; m <= length; ++m)
    if (b[static_cast<std::size_t>(m - 1)] != 0) {
      a = m;
      break;
    }
  if (!b.empty()) next[static_cast<std::size_t>(a - 1)] -= 1;
  if (cap >= 0)
    for (auto& v : next) v = std::min(v, cap);
  const int redraw = std::min(a - 1, length);

  auto extend = [&](std::vector<int>& state, const Real& weight) {
    Real carried = weight;
    for (int k = length + 1; k <= horizon; ++k) {
      for (const auto& [v, p] : eta_outcomes(eta[static_cast<std::size_t>(k - 1)], cap)) {
        if (v == 0) continue;
        state.push_back(v);
        emit(state, carried * p);
        state.pop_back();
      }
      carried *= eta[static_cast<std::size_t>(k - 1)].prob(0);
      if (carried == Real(0)) return;
      state.push_back(0);
    }
    state.resize(static_cast<std::size_t>(length));
    emit(std::vector<int>{}, carried);
  };

  auto fill = [&](auto&& self, int m, const Real& weight) -> void {
    if (m > redraw) {
      if (std::any_of(next.begin(), next.end(), [](int v) { return v != 0; })) {
        emit(next, weight);
      } else {
        extend(next, weight);
        next.resize(static_cast<std::size_t>(length));
      }
      return;
    }
    for (const auto& [v, p] : eta_outcomes(eta[static_cast<std::size_t>(m - 1)], cap)) {
      next[static_cast<std::size_t>(m - 1)] = v;
      self(self, m + 1, weight * p);
    }
  };
  fill(fill, 1, Real(1));
}

}  // namespace detail

/// Exact law of (K, A) induced by the B chain, by a forward sweep of the
/// transition kernel over (B_i, A_1..A_i). With a cap C the entries of B_i
/// are clamped at C - i; larger values cannot reach zero while A_{i+1}, ...,
/// A_{C-1} are still observed, so the clamp loses nothing.
template <class Real>
basic_dist_table<Real> exact_chain_law(const basic_environment<Real>& env, const enumeration_options& options = {}) {
  detail::check_enumerable(env.horizon(), options);
  const auto eta = backward_eta_laws(env);
  const int cap_k = options.max_individuals;
  if (cap_k == 1 || cap_k < 0) throw validation_error("max_individuals must be 0 or at least 2");
  const int horizon = env.horizon();
  using key = std::pair<std::vector<int>, std::vector<int>>;  // (B_i, A history)
  std::map<key, Real> frontier{{{{}, {}}, Real(1)}};
  basic_dist_table<Real> table;
  for (int i = 0; !frontier.empty(); ++i) {
    // Transition B_i -> B_{i+1}; termination means K = i + 1.
    std::map<key, Real> next_frontier;
    const int entry_cap = cap_k > 0 ? cap_k - (i + 1) : -1;
    for (const auto& [state, mass] : frontier) {
      const auto& [b, history] = state;
      detail::expand_b_transition(b, horizon, eta, entry_cap, [&](const std::vector<int>& next, const Real& p) {
        if (next.empty()) {
          table.add(encode_outcome(i + 1, history), mass * p);
          return;
        }
        auto a = static_cast<int>(std::find_if(next.begin(), next.end(), [](int v) { return v != 0; }) - next.begin()) + 1;
        auto h = history;
        h.push_back(a);
        if (cap_k > 0 && i + 2 >= cap_k) {
          table.add(encode_outcome(cap_k, h, true), mass * p);
          return;
        }
        next_frontier[{next, std::move(h)}] += mass * p;
      });
    }
    detail::check_budget(next_frontier.size(), options);
    frontier = std::move(next_frontier);
  }
  return table;
}

/// Sub-probability law of B_1, ..., B_steps from the B chain: entry i-1 maps
/// "b=v1,v2,..." to P(B_i = b), with "END" collecting the mass of K <= i.
template <class Real>
std::vector<basic_dist_table<Real>> b_chain_step_laws(const basic_environment<Real>& env, int steps,
                                                      const enumeration_options& options = {}) {
  detail::check_enumerable(env.horizon(), options);
  const auto eta = backward_eta_laws(env);
  std::map<std::vector<int>, Real> frontier{{{}, Real(1)}};
  Real ended(0);
  std::vector<basic_dist_table<Real>> out;
  for (int i = 0; i < steps; ++i) {
    std::map<std::vector<int>, Real> next_frontier;
    for (const auto& [b, mass] : frontier) {
      detail::expand_b_transition(b, env.horizon(), eta, -1, [&](const std::vector<int>& next, const Real& p) {
        if (next.empty()) {
          ended += mass * p;
        } else {
          next_frontier[next] += mass * p;
        }
      });
    }
    detail::check_budget(next_frontier.size(), options);
    frontier = std::move(next_frontier);
    basic_dist_table<Real> table;
    for (const auto& [b, mass] : frontier) table.add(encode_entries(b), mass);
    table.add("END", ended);
    out.push_back(std::move(table));
  }
  return out;
}

namespace detail {

/// Enumerates the D transition with every redrawn entry expanded. Entries are
/// capped at `cap` when cap >= 0. Without a cap, unbounded laws are cut at
/// the first value whose remaining tail is below `truncation`, and the lost
/// mass is added to `dropped`.
template <class Real, class Emit>
void expand_d_transition(const std::vector<int>& d, const std::vector<std::vector<std::pair<int, Real>>>& outcomes,
                         Emit&& emit) {
  std::vector<int> next = d;
  std::size_t a = next.size();
  for (std::size_t k = 0; k < next.size(); ++k)
    if (next[k] != 0) {
      a = k;
      break;
    }
  if (a < next.size()) next[a] -= 1;
  auto fill = [&](auto&& self, std::size_t m, const Real& weight) -> void {
    if (m == a) {
      emit(next, weight);
      return;
    }
    for (const auto& [v, p] : outcomes[m]) {
      next[m] = v;
      self(self, m + 1, weight * p);
    }
  };
  fill(fill, 0, Real(1));
}

template <class Real>
std::vector<std::vector<std::pair<int, Real>>> truncated_eta_outcomes(const std::vector<basic_eta_law<Real>>& eta,
                                                                      double truncation, Real& lost_per_draw) {
  std::vector<std::vector<std::pair<int, Real>>> out;
  lost_per_draw = Real(0);
  for (const auto& law : eta) {
    std::vector<std::pair<int, Real>> values;
    if (auto top = law.max_value()) {
      for (int v = 0; v <= *top; ++v)
        if (law.prob(v) != Real(0)) values.emplace_back(v, law.prob(v));
    } else {
      int v = 0;
      for (; !(to_double(law.tail_from(v)) < truncation); ++v) values.emplace_back(v, law.prob(v));
      lost_per_draw = std::max(lost_per_draw, law.tail_from(v));
    }
    out.push_back(std::move(values));
  }
  return out;
}

}  // namespace detail

/// Sub-probability law of the prefix D_i(1..l_i), l_i = max(A_1..A_i), for
/// i = 1..steps under the finite-population D chain (an all-zero D_i ends the
/// population at individual i). Same keys as b_chain_step_laws.
template <class Real>
std::vector<basic_dist_table<Real>> d_chain_prefix_laws(const basic_environment<Real>& env, int steps,
                                                        const enumeration_options& options = {}) {
  detail::check_enumerable(env.horizon(), options);
  Real lost(0);
  const auto outcomes = detail::truncated_eta_outcomes(backward_eta_laws(env), options.truncation, lost);
  if (lost != Real(0)) throw validation_error("prefix laws need bounded eta laws");
  using key = std::pair<std::vector<int>, int>;  // (D_i, l_i)
  std::map<key, Real> frontier{{{std::vector<int>(static_cast<std::size_t>(env.horizon()), 0), 0}, Real(1)}};
  Real ended(0);
  std::vector<basic_dist_table<Real>> out;
  for (int i = 0; i < steps; ++i) {
    std::map<key, Real> next_frontier;
    for (const auto& [state, mass] : frontier) {
      detail::expand_d_transition(state.first, outcomes, [&](const std::vector<int>& next, const Real& p) {
        auto it = std::find_if(next.begin(), next.end(), [](int v) { return v != 0; });
        if (it == next.end()) {
          ended += mass * p;
          return;
        }
        const int l = std::max(state.second, static_cast<int>(it - next.begin()) + 1);
        next_frontier[{next, l}] += mass * p;
      });
    }
    detail::check_budget(next_frontier.size(), options);
    frontier = std::move(next_frontier);
    basic_dist_table<Real> table;
    for (const auto& [state, mass] : frontier)
      table.add(encode_entries(std::vector<int>(state.first.begin(), state.first.begin() + state.second)), mass);
    table.add("END", ended);
    out.push_back(std::move(table));
  }
  return out;
}

/// Exact law of (K, A) from the finite-population D chain.
template <class Real>
basic_dist_table<Real> exact_d_chain_law(const basic_environment<Real>& env, const enumeration_options& options = {}) {
  detail::check_enumerable(env.horizon(), options);
  Real lost(0);
  const auto outcomes = detail::truncated_eta_outcomes(backward_eta_laws(env), options.truncation, lost);
  if (lost != Real(0)) throw validation_error("the D-chain law needs bounded eta laws");
  using key = std::pair<std::vector<int>, std::vector<int>>;  // (D_i, A history)
  std::map<key, Real> frontier{{{std::vector<int>(static_cast<std::size_t>(env.horizon()), 0), {}}, Real(1)}};
  basic_dist_table<Real> table;
  const int cap = options.max_individuals;
  for (int i = 0; !frontier.empty(); ++i) {
    std::map<key, Real> next_frontier;
    for (const auto& [state, mass] : frontier) {
      detail::expand_d_transition(state.first, outcomes, [&](const std::vector<int>& next, const Real& p) {
        auto it = std::find_if(next.begin(), next.end(), [](int v) { return v != 0; });
        if (it == next.end()) {
          table.add(encode_outcome(i + 1, state.second), mass * p);
          return;
        }
        auto h = state.second;
        h.push_back(static_cast<int>(it - next.begin()) + 1);
        if (cap > 0 && i + 2 >= cap) {
          table.add(encode_outcome(cap, h, true), mass * p);
          return;
        }
        next_frontier[{next, std::move(h)}] += mass * p;
      });
    }
    detail::check_budget(next_frontier.size(), options);
    frontier = std::move(next_frontier);
  }
  return table;
}

/// Law of D_i under the D chain in which an all-zero state redraws every entry
/// (the restriction to depths 1..N of the unbounded-population chain). Entry
/// i-1 of the result maps the full vector D_i to its probability. Unbounded
/// eta laws are truncated; `residual` on each table bounds the dropped mass.
template <class Real>
std::vector<basic_dist_table<Real>> d_chain_marginal_laws(const basic_environment<Real>& env, int steps,
                                                          const enumeration_options& options = {}) {
  detail::check_enumerable(env.horizon(), options);
  Real lost(0);
  const auto outcomes = detail::truncated_eta_outcomes(backward_eta_laws(env), options.truncation, lost);
  std::map<std::vector<int>, Real> frontier{{std::vector<int>(static_cast<std::size_t>(env.horizon()), 0), Real(1)}};
  std::vector<basic_dist_table<Real>> out;
  double residual = 0.0;
  for (int i = 0; i < steps; ++i) {
    std::map<std::vector<int>, Real> next_frontier;
    for (const auto& [d, mass] : frontier)
      detail::expand_d_transition(d, outcomes, [&](const std::vector<int>& next, const Real& p) {
        next_frontier[next] += mass * p;
      });
    detail::check_budget(next_frontier.size(), options);
    frontier = std::move(next_frontier);
    residual += static_cast<double>(env.horizon()) * to_double(lost);
    basic_dist_table<Real> table;
    for (const auto& [d, mass] : frontier) table.add(encode_entries(d), mass);
    table.residual = residual;
    out.push_back(std::move(table));
  }
  return out;
}

}  // namespace gwcpp
