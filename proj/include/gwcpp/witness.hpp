#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gwcpp/dist_table.hpp"
#include "gwcpp/environment.hpp"
#include "gwcpp/errors.hpp"
#include "gwcpp/exact_laws.hpp"
#include "gwcpp/genealogy.hpp"
#include "gwcpp/point_measure.hpp"
#include "gwcpp/random.hpp"

namespace gwcpp {

struct witness_options {
  /// Smallest TV between the two conditional laws that counts as a witness.
  double threshold = 0.01;
  /// Both histories must have at least this probability.
  double min_history_mass = 1e-3;
  /// Last step i at which the pair (B~_{i-1}, B~_i) is examined.
  int max_steps = 12;
  int max_horizon = 6;
  int max_support = 3;
  std::size_t max_states = 2'000'000;
};

/// Two histories (x, y) and (x', y) of B~ sharing the present state y whose
/// conditional laws of the next state differ. "END" stands for "no further
/// individual".
struct btilde_witness {
  int step = 0;  ///< i: histories are (B~_{i-1}, B~_i), the next state is B~_{i+1}
  point_measure present;
  point_measure first_past;
  point_measure second_past;
  double first_mass = 0.0;
  double second_mass = 0.0;
  dist_table first_law;
  dist_table second_law;
  double tv = 0.0;
  /// Outcome with the largest |difference| and its sign (first minus second).
  std::string pivot;
  double pivot_difference = 0.0;
};

/// Exact search over the finite-population D chain, whose state
/// (D_i, B~_{i-1}, B~_i) is Markov. At the first step i >= 2 with a qualifying
/// pair the pair of largest TV is returned; nullopt if none up to max_steps.
inline std::optional<btilde_witness> btilde_witness_search(const environment& env, const witness_options& options = {}) {
  if (env.horizon() > options.max_horizon) throw enumeration_guard("witness search horizon above the configured limit");
  const auto top = env.max_offspring();
  if (!top) throw validation_error("witness search needs finite-support laws");
  if (*top > options.max_support - 1) throw enumeration_guard("witness search support above the configured limit");
  enumeration_options enum_options;
  enum_options.max_horizon = options.max_horizon;
  double lost = 0.0;
  const auto outcomes = detail::truncated_eta_outcomes(backward_eta_laws(env), 0.0, lost);

  using state = std::tuple<std::vector<int>, point_measure, point_measure>;
  std::map<state, double> frontier{{{std::vector<int>(static_cast<std::size_t>(env.horizon()), 0), {}, {}}, 1.0}};
  for (int i = 0; i <= options.max_steps; ++i) {
    // frontier holds (D_i, B~_{i-1}, B~_i) restricted to K >= i + 1.
    std::map<state, double> next_frontier;
    std::map<std::pair<point_measure, point_measure>, std::map<std::string, double>> joint;
    for (const auto& [s, mass] : frontier) {
      const auto& [d, x, y] = s;
      detail::expand_d_transition(d, outcomes, [&, &x = x, &y = y](const std::vector<int>& next, double p) {
        auto it = std::find_if(next.begin(), next.end(), [](int v) { return v != 0; });
        if (it == next.end()) {
          if (i >= 2) joint[{x, y}]["END"] += mass * p;
          return;
        }
        const int a = static_cast<int>(it - next.begin()) + 1;
        point_measure z = btilde_next(y, a, *it);
        if (i >= 2) joint[{x, y}][z.to_string()] += mass * p;
        next_frontier[{next, y, std::move(z)}] += mass * p;
      });
    }
    if (next_frontier.size() > options.max_states) throw enumeration_guard("witness search state budget exceeded");
    if (i >= 2) {
      std::optional<btilde_witness> best;
      for (auto first = joint.begin(); first != joint.end(); ++first) {
        double m1 = 0.0;
        for (const auto& [z, p] : first->second) m1 += p;
        if (m1 < options.min_history_mass) continue;
        for (auto second = std::next(first); second != joint.end(); ++second) {
          if (second->first.second != first->first.second) continue;
          double m2 = 0.0;
          for (const auto& [z, p] : second->second) m2 += p;
          if (m2 < options.min_history_mass) continue;
          dist_table law1, law2;
          for (const auto& [z, p] : first->second) law1.add(z, p / m1);
          for (const auto& [z, p] : second->second) law2.add(z, p / m2);
          const double tv = tv_distance(law1, law2);
          if (tv <= options.threshold || (best && tv <= best->tv)) continue;
          btilde_witness w;
          w.step = i;
          w.present = first->first.second;
          w.first_past = first->first.first;
          w.second_past = second->first.first;
          w.first_mass = m1;
          w.second_mass = m2;
          w.first_law = law1;
          w.second_law = law2;
          w.tv = tv;
          std::set<std::string> keys;
          for (const auto& [k, p] : law1.probs) keys.insert(k);
          for (const auto& [k, p] : law2.probs) keys.insert(k);
          for (const auto& k : keys) {
            const double diff = law1.prob(k) - law2.prob(k);
            if (std::abs(diff) > std::abs(w.pivot_difference)) {
              w.pivot = k;
              w.pivot_difference = diff;
            }
          }
          best = std::move(w);
        }
      }
      if (best) return best;
    }
    frontier = std::move(next_frontier);
  }
  return std::nullopt;
}

/// Monte Carlo re-check of a witness on forward-simulated trees.
struct witness_validation {
  std::uint64_t samples = 0;
  std::uint64_t first_count = 0;   ///< trees with (B~_{i-1}, B~_i) = (x, y)
  std::uint64_t second_count = 0;  ///< trees with (B~_{i-1}, B~_i) = (x', y)
  double first_freq = 0.0;         ///< frequency of the pivot outcome given (x, y)
  double second_freq = 0.0;
  double z_score = 0.0;            ///< (first_freq - second_freq) / standard error
  bool same_direction = false;
  bool significant = false;
};

inline witness_validation validate_witness(const environment& env, const btilde_witness& w, std::uint64_t samples,
                                           std::uint64_t seed, int threads = 1) {
  const environment_sampler sampler(env);
  if (!(survival_prob(env, env.horizon()) > 0.0)) throw degenerate_error("the founder cannot leave present-day descendants");
  struct tally {
    std::uint64_t n1 = 0, h1 = 0, n2 = 0, h2 = 0;
  };
  const std::uint64_t block = 4096;
  const std::uint64_t blocks = (samples + block - 1) / block;
  const auto parts = parallel_runs(blocks, threads, [&](std::uint64_t b) {
    tally t;
    for (std::uint64_t r = b * block; r < std::min(samples, (b + 1) * block); ++r) {
      engine gen = make_engine(seed, r);
      const auto realized = condition_on_survival(sampler, gen, 1'000'000).tree;
      const auto seq = extract_btilde(realized);
      // seq[k] = B~_{k+1}; the history needs B~_{i-1} and B~_i.
      if (static_cast<int>(seq.size()) < w.step) continue;
      const auto& x = seq[static_cast<std::size_t>(w.step - 2)];
      const auto& y = seq[static_cast<std::size_t>(w.step - 1)];
      if (y != w.present) continue;
      const std::string z = static_cast<int>(seq.size()) > w.step ? seq[static_cast<std::size_t>(w.step)].to_string() : "END";
      if (x == w.first_past) {
        ++t.n1;
        t.h1 += z == w.pivot;
      } else if (x == w.second_past) {
        ++t.n2;
        t.h2 += z == w.pivot;
      }
    }
    return t;
  });
  tally total;
  for (const auto& t : parts) {
    total.n1 += t.n1;
    total.h1 += t.h1;
    total.n2 += t.n2;
    total.h2 += t.h2;
  }
  witness_validation v;
  v.samples = samples;
  v.first_count = total.n1;
  v.second_count = total.n2;
  if (total.n1 == 0 || total.n2 == 0) return v;
  v.first_freq = static_cast<double>(total.h1) / static_cast<double>(total.n1);
  v.second_freq = static_cast<double>(total.h2) / static_cast<double>(total.n2);
  const double se = std::sqrt(v.first_freq * (1 - v.first_freq) / static_cast<double>(total.n1) +
                              v.second_freq * (1 - v.second_freq) / static_cast<double>(total.n2));
  const double diff = v.first_freq - v.second_freq;
  v.z_score = se > 0 ? diff / se : 0.0;
  v.same_direction = (diff > 0) == (w.pivot_difference > 0) && diff != 0.0;
  v.significant = std::abs(v.z_score) > 3.0;
  return v;
}

}  // namespace gwcpp
