#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gwcpp/environment.hpp"
#include "gwcpp/errors.hpp"
#include "gwcpp/eta_law.hpp"
#include "gwcpp/pgf.hpp"
#include "gwcpp/random.hpp"

namespace gwcpp {

/// State of the B chain. The default-constructed state is B_0 (empty vector,
/// A_0 = infinity); every later state carries a nonzero entry.
class b_state {
 public:
  b_state() = default;

  explicit b_state(std::vector<int> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw inconsistent_state("use the default state for B_0");
    for (int v : entries_)
      if (v < 0) throw inconsistent_state("B entries are non-negative");
    if (!first_nonzero()) throw inconsistent_state("B_i (i >= 1) needs a nonzero entry");
  }

  bool is_initial() const { return entries_.empty(); }
  int length() const { return static_cast<int>(entries_.size()); }
  std::span<const int> entries() const { return entries_; }
  int operator[](int m) const { return entries_.at(static_cast<std::size_t>(m - 1)); }

  /// s(b): 1-based position of the first nonzero entry; nullopt = infinity.
  std::optional<int> first_nonzero() const {
    for (std::size_t k = 0; k < entries_.size(); ++k)
      if (entries_[k] != 0) return static_cast<int>(k) + 1;
    return std::nullopt;
  }

  friend bool operator==(const b_state&, const b_state&) = default;
  friend auto operator<=>(const b_state&, const b_state&) = default;

 private:
  std::vector<int> entries_;
};

/// One B transition with eta^{(-m)} values supplied by `draw(m)`.
///
/// With A = s(b) and l = length(b): entries A < m <= l are copied, entry A is
/// decremented, entries 1 <= m < A are redrawn. If the 1..l prefix is then all
/// zero, eta^{(-k)} is drawn for k = l+1, l+2, ... <= horizon until a nonzero
/// value appears, which fixes the new length. No nonzero value within the
/// horizon means there is no further individual: returns nullopt.
template <class Draw>
std::optional<b_state> b_transition(const b_state& state, int horizon, Draw&& draw) {
  const int length = state.length();
  if (length > horizon) throw inconsistent_state("B state longer than the horizon");
  std::vector<int> next(state.entries().begin(), state.entries().end());
  const int a = state.is_initial() ? length + 1 : *state.first_nonzero();
  if (!state.is_initial()) next[static_cast<std::size_t>(a - 1)] -= 1;
  for (int m = 1; m < a && m <= length; ++m) next[static_cast<std::size_t>(m - 1)] = draw(m);
  if (std::any_of(next.begin(), next.end(), [](int v) { return v != 0; })) return b_state(std::move(next));
  for (int k = length + 1; k <= horizon; ++k) {
    const int v = draw(k);
    next.push_back(v);
    if (v != 0) return b_state(std::move(next));
  }
  return std::nullopt;
}

/// D chain state: (D(1), ..., D(N)).
using d_state = std::vector<int>;

/// One D transition: with A the first nonzero position (infinity for the null
/// sequence), entries m > A are copied, entry A is decremented and entries
/// m < A are redrawn.
template <class Draw>
d_state d_transition(const d_state& state, Draw&& draw) {
  d_state next = state;
  std::size_t a = next.size();
  for (std::size_t k = 0; k < next.size(); ++k)
    if (next[k] != 0) {
      a = k;
      break;
    }
  if (a < next.size()) next[a] -= 1;
  for (std::size_t k = 0; k < a; ++k) next[k] = draw(static_cast<int>(k) + 1);
  return next;
}

inline std::optional<int> first_nonzero(std::span<const int> entries) {
  for (std::size_t k = 0; k < entries.size(); ++k)
    if (entries[k] != 0) return static_cast<int>(k) + 1;
  return std::nullopt;
}

/// Samplers for eta^{(-m)}, m = 1..N, built once per environment.
class backward_kernel {
 public:
  explicit backward_kernel(const environment& env) : horizon_(env.horizon()) {
    if (!(survival_prob(env, env.horizon()) > 0.0))
      throw degenerate_error("eta undefined: the founder cannot leave present-day descendants");
    for (const auto& law : backward_eta_laws(env)) samplers_.emplace_back(law);
  }

  int horizon() const { return horizon_; }

  int draw(int depth, engine& gen) const {
    if (depth < 1 || depth > horizon_) throw horizon_error("eta depth outside the horizon");
    return samplers_[static_cast<std::size_t>(depth - 1)](uniform01(gen));
  }

 private:
  int horizon_;
  std::vector<eta_sampler> samplers_;
};

/// nullopt when the chain terminates (no individual i+2 within the horizon).
inline std::optional<b_state> b_step(const b_state& state, const backward_kernel& kernel, engine& gen) {
  return b_transition(state, kernel.horizon(), [&](int m) { return kernel.draw(m, gen); });
}

inline d_state d_step(const d_state& state, const backward_kernel& kernel, engine& gen) {
  if (static_cast<int>(state.size()) != kernel.horizon()) throw inconsistent_state("D state length must equal the horizon");
  for (int v : state)
    if (v < 0) throw inconsistent_state("D entries are non-negative");
  return d_transition(state, [&](int m) { return kernel.draw(m, gen); });
}

/// One emitted state of a chain run.
struct chain_step {
  std::vector<int> entries;
  int length = 0;  ///< l_i (running max of A for D and LF runs)
  int coalescence = 0;
};

/// Path of a backward chain. `terminated` means the run ended because no
/// further individual exists; then K = steps.size() + 1.
struct chain_run {
  std::vector<chain_step> steps;
  bool terminated = false;

  int survivors() const { return static_cast<int>(steps.size()) + 1; }
  std::vector<int> coalescence_times() const {
    std::vector<int> a;
    for (const auto& s : steps) a.push_back(s.coalescence);
    return a;
  }
};

/// Iterates the B chain from B_0 until termination or until K reaches
/// `max_individuals` (0 = unbounded).
inline chain_run b_run(const backward_kernel& kernel, engine& gen, int max_individuals = 0) {
  chain_run run;
  b_state state;
  while (max_individuals <= 0 || run.survivors() < max_individuals) {
    auto next = b_step(state, kernel, gen);
    if (!next) {
      run.terminated = true;
      break;
    }
    const int a = *next->first_nonzero();
    const int l = next->length();
    if (l != std::max(state.length(), a)) throw inconsistent_state("length update violated l' = l v A");
    state = std::move(*next);
    run.steps.push_back({std::vector<int>(state.entries().begin(), state.entries().end()), l, a});
  }
  return run;
}

/// Iterates the D chain from the null sequence. D_i all zero means individual
/// i is the last one.
inline chain_run d_run(const backward_kernel& kernel, engine& gen, int max_individuals = 0) {
  chain_run run;
  d_state state(static_cast<std::size_t>(kernel.horizon()), 0);
  int running = 0;
  while (max_individuals <= 0 || run.survivors() < max_individuals) {
    state = d_step(state, kernel, gen);
    auto a = first_nonzero(state);
    if (!a) {
      run.terminated = true;
      break;
    }
    running = std::max(running, *a);
    run.steps.push_back({state, running, *a});
  }
  return run;
}

/// Samples i.i.d. coalescence times for a linear-fractional environment with
/// P(A > n) = (1 + sum s_i)^{-1}; nullopt is the "beyond the horizon" outcome
/// with mass P(A > N).
class lf_cpp_sampler {
 public:
  explicit lf_cpp_sampler(const environment& env) {
    if (!env.is_linear_fractional()) throw not_linear_fractional("lf sampler needs a linear-fractional environment");
    for (int n = 1; n <= env.horizon(); ++n) cdf_.push_back(1.0 - lf_a1_tail(env, n));
  }

  std::optional<int> operator()(engine& gen) const {
    const double u = uniform01(gen);
    for (std::size_t n = 0; n < cdf_.size(); ++n)
      if (u < cdf_[n]) return static_cast<int>(n) + 1;
    return std::nullopt;
  }

 private:
  std::vector<double> cdf_;
};

inline std::vector<std::optional<int>> lf_cpp_sample(const environment& env, engine& gen, std::size_t count) {
  lf_cpp_sampler sampler(env);
  std::vector<std::optional<int>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler(gen));
  return out;
}

/// Draws A_1, A_2, ... until the first "beyond the horizon" outcome.
inline chain_run lf_run(const lf_cpp_sampler& sampler, engine& gen, int max_individuals = 0) {
  chain_run run;
  int running = 0;
  while (max_individuals <= 0 || run.survivors() < max_individuals) {
    auto a = sampler(gen);
    if (!a) {
      run.terminated = true;
      break;
    }
    running = std::max(running, *a);
    run.steps.push_back({{}, running, *a});
  }
  return run;
}

/// Pathwise invariants of a B or D run: after a step with coalescence A from
/// a state of length l, entries A < m <= l are copied and entry A drops by
/// one; l' = l v A'. Returns the first violation, or an empty string.
inline std::string validate_prefix_invariants(const chain_run& run, bool b_chain) {
  for (std::size_t i = 1; i < run.steps.size(); ++i) {
    const auto& prev = run.steps[i - 1];
    const auto& next = run.steps[i];
    const int a = prev.coalescence;
    const int l = static_cast<int>(prev.entries.size());
    std::ostringstream msg;
    if (next.entries[static_cast<std::size_t>(a - 1)] != prev.entries[static_cast<std::size_t>(a - 1)] - 1) {
      msg << "step " << i + 1 << ": entry " << a << " not decremented";
      return msg.str();
    }
    for (int m = a + 1; m <= l; ++m)
      if (next.entries[static_cast<std::size_t>(m - 1)] != prev.entries[static_cast<std::size_t>(m - 1)]) {
        msg << "step " << i + 1 << ": entry " << m << " not copied";
        return msg.str();
      }
    if (next.length != std::max(prev.length, next.coalescence)) {
      msg << "step " << i + 1 << ": length update violated";
      return msg.str();
    }
    if (b_chain && static_cast<int>(next.entries.size()) != next.length) {
      msg << "step " << i + 1 << ": B length differs from l";
      return msg.str();
    }
  }
  return {};
}

/// CSV rows "run_id,step,l,A,b_entries" with entries joined by ';'.
inline void write_trace_csv(std::ostream& out, std::uint64_t run_id, const chain_run& run) {
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    const auto& s = run.steps[i];
    out << run_id << ',' << i + 1 << ',' << s.length << ',' << s.coalescence << ',';
    for (std::size_t k = 0; k < s.entries.size(); ++k) out << (k ? ";" : "") << s.entries[k];
    out << '\n';
  }
}

}  // namespace gwcpp
