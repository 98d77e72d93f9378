#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gwcpp/chains.hpp"
#include "gwcpp/dist_table.hpp"
#include "gwcpp/environment.hpp"
#include "gwcpp/exact_laws.hpp"
#include "gwcpp/figure1.hpp"
#include "gwcpp/genealogy.hpp"
#include "gwcpp/io.hpp"
#include "gwcpp/pgf.hpp"
#include "gwcpp/random.hpp"
#include "gwcpp/witness.hpp"

namespace gwcpp {

/// Outcome of one verification check. `inconclusive` marks a search that
/// found nothing; it never counts as a pass.
struct check_result {
  check_result() = default;
  check_result(std::string name, std::string env_digest) : name(std::move(name)), env_digest(std::move(env_digest)) {}

  std::string name;
  std::string env_digest;
  double metric = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool inconclusive = false;
  std::string detail;
};

inline nlohmann::json to_json(const check_result& r) {
  nlohmann::json j{{"name", r.name},           {"env_digest", r.env_digest}, {"metric", r.metric},
                   {"threshold", r.threshold}, {"pass", r.pass},             {"status", r.inconclusive ? "inconclusive" : (r.pass ? "pass" : "fail")}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

/// Law of Z_n for the population founded at generation -n, by repeated
/// convolution of the offspring laws. Population sizes above `max_size` and
/// offspring counts with tail below `truncation` are dropped; `lost` receives
/// the dropped mass.
template <class Real>
std::vector<Real> population_law(const basic_environment<Real>& env, int n, int max_size, double truncation,
                                 double& lost) {
  if (n < 1 || n > env.horizon()) throw horizon_error("population law depth outside [1, N]");
  std::vector<Real> z{Real(0), Real(1)};
  for (int depth = n; depth >= 1; --depth) {
    const auto& law = env.law_at_depth(depth);
    int top = 0;
    if (auto m = law.max_offspring()) {
      top = *m;
    } else {
      while (!(to_double(law.tail(top)) < truncation)) ++top;
    }
    std::vector<Real> offspring;
    for (int k = 0; k <= top; ++k) offspring.push_back(law.pmf(k));
    std::vector<Real> next(1, Real(0));
    std::vector<Real> power_law{Real(1)};  // law of a sum of j offspring counts
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (j > 0) {
        std::vector<Real> conv(std::min(power_law.size() + offspring.size() - 1, static_cast<std::size_t>(max_size) + 1),
                               Real(0));
        for (std::size_t a = 0; a < power_law.size(); ++a)
          for (std::size_t b = 0; b < offspring.size() && a + b < conv.size(); ++b) conv[a + b] += power_law[a] * offspring[b];
        power_law = std::move(conv);
      }
      if (z[j] == Real(0)) continue;
      if (next.size() < power_law.size()) next.resize(power_law.size(), Real(0));
      for (std::size_t k = 0; k < power_law.size(); ++k) next[k] += z[j] * power_law[k];
    }
    z = std::move(next);
  }
  Real total(0);
  for (const auto& p : z) total += p;
  lost = std::max(0.0, 1.0 - to_double(total));
  return z;
}

/// P(A_1 > n) read off a (K, A) table: K = 1 or A_1 > n.
template <class Real>
Real a1_tail_from_table(const basic_dist_table<Real>& table, int n) {
  Real tail(0);
  for (const auto& [key, p] : table.probs) {
    const auto o = decode_outcome(key);
    if (o.times.empty() || o.times.front() > n) tail += p;
  }
  return tail;
}

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

}  // namespace detail

struct law_check_options {
  /// Cap used for unbounded laws (K >= cap lumped).
  int lf_max_individuals = 6;
  double tolerance = 1e-10;
};

/// TV between the exact (K, A) laws from trees and from the B chain. Uses
/// exact rationals when available (then TV must be exactly 0).
inline check_result check_tree_vs_chain(const parsed_environment& parsed, const law_check_options& options = {}) {
  check_result r{"tree_vs_chain", environment_digest(parsed.env)};
  r.threshold = options.tolerance;
  enumeration_options enum_options;
  if (!parsed.env.max_offspring()) enum_options.max_individuals = options.lf_max_individuals;
  if (parsed.exact && parsed.env.max_offspring()) {
    const auto tree_law = exact_tree_law(*parsed.exact, enum_options);
    const auto chain_law = exact_chain_law(*parsed.exact, enum_options);
    const rational tv = tv_distance(tree_law, chain_law);
    r.metric = to_double(tv);
    r.pass = tv == rational(0) && tree_law.total() == rational(1);
    r.detail = "rational mode, " + std::to_string(tree_law.probs.size()) + " outcomes, tv=" + tv.str();
    return r;
  }
  const auto tree_law = exact_tree_law(parsed.env, enum_options);
  const auto chain_law = exact_chain_law(parsed.env, enum_options);
  r.metric = tv_distance(tree_law, chain_law);
  r.threshold = options.tolerance + tree_law.residual + chain_law.residual;
  r.pass = r.metric < r.threshold && std::abs(chain_law.total() - 1.0) < 1e-10;
  r.detail = std::to_string(tree_law.probs.size()) + " outcomes";
  if (enum_options.max_individuals > 0) r.detail += ", K lumped at " + std::to_string(enum_options.max_individuals);
  return r;
}

/// P(A_1 > n) for n = 1..N from the closed form, the eta product, the
/// population law P(Z_n = 1 | Z_n > 0), and the exact tree table.
inline check_result check_a1_identities(const parsed_environment& parsed, const law_check_options& options = {}) {
  check_result r{"a1_identities", environment_digest(parsed.env)};
  r.threshold = options.tolerance;
  const auto& env = parsed.env;
  enumeration_options enum_options;
  if (!env.max_offspring()) enum_options.max_individuals = options.lf_max_individuals;
  const auto table = exact_tree_law(env, enum_options);
  double worst = 0.0;
  double budget = options.tolerance + table.residual;
  for (int n = 1; n <= env.horizon(); ++n) {
    const double closed = a1_tail(env, n);
    const double product = a1_tail_product(env, n);
    double lost = 0.0;
    const auto z = population_law(env, n, 256, 1e-18, lost);
    const double alive = 1.0 - to_double(z.at(0));
    const double enumerated = to_double(z.at(1)) / alive;
    worst = std::max({worst, std::abs(closed - product), std::abs(closed - enumerated) - 2 * lost / alive});
    if (n == env.horizon()) worst = std::max(worst, std::abs(closed - a1_tail_from_table(table, n)) - table.residual);
  }
  r.metric = std::max(0.0, worst);
  r.threshold = budget;
  r.pass = r.metric < r.threshold;
  return r;
}

/// Empirical P(A_1 > n), n = 1..N, from conditioned tree simulations against
/// the closed form; every depth must fall within `se_bound` binomial standard
/// errors.
inline check_result check_a1_monte_carlo(const environment& env, std::uint64_t samples, std::uint64_t seed,
                                         int threads = 1, double se_bound = 3.0) {
  check_result r{"a1_monte_carlo", environment_digest(env)};
  r.threshold = se_bound;
  const environment_sampler sampler(env);
  const auto first_times = parallel_runs(samples, threads, [&](std::uint64_t run) {
    engine gen = make_engine(seed, run);
    const auto cpp = coalescent_times(condition_on_survival(sampler, gen, 1'000'000).tree);
    return cpp.times.empty() ? env.horizon() + 1 : cpp.times.front();
  });
  double worst = 0.0;
  std::ostringstream detail;
  for (int n = 1; n <= env.horizon(); ++n) {
    std::uint64_t hits = 0;
    for (int a : first_times) hits += a > n;
    const double p = a1_tail(env, n);
    const double freq = static_cast<double>(hits) / static_cast<double>(samples);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(samples));
    const double z = se > 0 ? std::abs(freq - p) / se : (freq == p ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    detail << (n > 1 ? " " : "") << "n=" << n << ":" << detail::fmt(freq) << "/" << detail::fmt(p);
  }
  r.metric = worst;
  r.pass = worst <= se_bound;
  r.detail = detail.str();
  return r;
}

/// Linear-fractional closed forms against the generic machinery: A_1 tails
/// and the geometric law of eta at every depth for k <= max_k.
inline check_result check_lf_closed_forms(const environment& env, int max_k = 50, double tolerance = 1e-10) {
  check_result r{"lf_closed_forms", environment_digest(env)};
  r.threshold = tolerance;
  double worst = 0.0;
  for (int n = 1; n <= env.horizon(); ++n) {
    worst = std::max(worst, std::abs(lf_a1_tail(env, n) - a1_tail(env, n)));
    const double success = lf_eta_success(env, n);
    const environment founder_at_n = restrict_to_depth(env, n);
    for (int k = 0; k <= max_k; ++k) {
      const double generic = eta_prob_generic(founder_at_n, n, k);
      worst = std::max(worst, std::abs(generic - success * std::pow(1 - success, k)));
    }
  }
  r.metric = worst;
  r.pass = worst < tolerance;
  return r;
}

/// Joint law of (A_1, A_2) given K >= 3 from the exact chain law, with its
/// product of marginals and the i.i.d. law P(A = a | A <= N) predicted for
/// linear-fractional environments.
struct pair_law {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> first;
  std::map<int, double> second;
  double residual = 0.0;
};

inline pair_law first_pair_law(const environment& env, const enumeration_options& base = {}) {
  enumeration_options options = base;
  options.max_individuals = 3;
  const auto table = exact_chain_law(env, options);
  pair_law law;
  law.residual = table.residual;
  double mass = 0.0;
  for (const auto& [key, p] : table.probs) {
    const auto o = decode_outcome(key);
    if (!o.lumped) continue;
    law.joint[{o.times[0], o.times[1]}] += p;
    mass += p;
  }
  if (!(mass > 0.0)) throw degenerate_error("K >= 3 has probability zero");
  for (auto& [ab, p] : law.joint) {
    p /= mass;
    law.first[ab.first] += p;
    law.second[ab.second] += p;
  }
  return law;
}

inline double independence_tv(const pair_law& law) {
  double sum = 0.0;
  for (const auto& [a, pa] : law.first)
    for (const auto& [b, pb] : law.second) {
      auto it = law.joint.find({a, b});
      sum += std::abs((it == law.joint.end() ? 0.0 : it->second) - pa * pb);
    }
  return sum / 2;
}

inline check_result lf_iid_check(const environment& env, double tolerance = 1e-8) {
  if (!env.is_linear_fractional()) throw not_linear_fractional("lf_iid_check needs a linear-fractional environment");
  check_result r{"lf_iid", environment_digest(env)};
  const auto law = first_pair_law(env);
  r.metric = independence_tv(law);
  r.threshold = tolerance + law.residual;
  const int n = env.horizon();
  const double inside = 1.0 - lf_a1_tail(env, n);
  double marginal_gap = 0.0;
  for (int a = 1; a <= n; ++a) {
    const double upper = a == 1 ? 1.0 : lf_a1_tail(env, a - 1);
    const double predicted = (upper - lf_a1_tail(env, a)) / inside;
    auto get = [&](const std::map<int, double>& m) {
      auto it = m.find(a);
      return it == m.end() ? 0.0 : it->second;
    };
    marginal_gap = std::max({marginal_gap, std::abs(get(law.first) - predicted), std::abs(get(law.second) - predicted)});
  }
  r.pass = r.metric < r.threshold && marginal_gap < 1e-10;
  r.detail = "marginal gap " + detail::fmt(marginal_gap);
  return r;
}

/// The same factorization measured on an arbitrary environment; used as a
/// control, where dependence between A_1 and A_2 is expected.
inline check_result independence_control(const environment& env, double min_tv = 1e-3) {
  check_result r{"iid_control", environment_digest(env)};
  r.metric = independence_tv(first_pair_law(env));
  r.threshold = min_tv;
  r.pass = r.metric > min_tv;
  return r;
}

/// Exact law of D_i (all-zero states redraw every entry) in a
/// linear-fractional environment: at every step i <= steps the entries must be
/// independent geometric variables with success lambda_n.
inline check_result check_geometric_d_exact(const environment& env, int steps, double tolerance = 1e-8,
                                            double truncation = 1e-13) {
  if (!env.is_linear_fractional()) throw not_linear_fractional("the geometric D check needs a linear-fractional environment");
  check_result r{"d_geometric_exact", environment_digest(env)};
  enumeration_options options;
  options.truncation = truncation;
  const auto laws = d_chain_marginal_laws(env, steps, options);
  std::vector<double> success;
  for (int n = 1; n <= env.horizon(); ++n) success.push_back(lf_eta_success(env, n));
  double worst = 0.0;
  double residual = 0.0;
  for (const auto& table : laws) {
    residual = std::max(residual, table.residual);
    std::vector<std::map<int, double>> marginals(success.size());
    for (const auto& [key, p] : table.probs) {
      std::stringstream in(key.substr(2));
      std::string item;
      std::vector<int> d;
      while (std::getline(in, item, ',')) d.push_back(std::stoi(item));
      double product = 1.0;
      for (std::size_t n = 0; n < d.size(); ++n) {
        marginals[n][d[n]] += p;
        product *= success[n] * std::pow(1 - success[n], d[n]);
      }
      worst = std::max(worst, std::abs(p - product));
    }
    for (std::size_t n = 0; n < success.size(); ++n)
      for (const auto& [k, p] : marginals[n])
        worst = std::max(worst, std::abs(p - success[n] * std::pow(1 - success[n], k)));
  }
  r.metric = worst;
  r.threshold = tolerance + residual;
  r.pass = r.metric < r.threshold;
  return r;
}

/// Chi-squared test of D_step(n) ~ Geometric(lambda_n), n = 1..N, from
/// simulated D-chain paths; the per-depth statistics are summed. Each seed
/// must give a p-value above `min_p`.
inline check_result check_geometric_d_monte_carlo(const environment& env, int step, std::uint64_t samples,
                                                  const std::vector<std::uint64_t>& seeds, int threads = 1,
                                                  double min_p = 0.01, double min_expected = 5.0) {
  if (!env.is_linear_fractional()) throw not_linear_fractional("the geometric D check needs a linear-fractional environment");
  check_result r{"d_geometric_chi2", environment_digest(env)};
  r.threshold = min_p;
  const backward_kernel kernel(env);
  const int horizon = env.horizon();
  double worst = 1.0;
  std::ostringstream detail;
  for (std::uint64_t seed : seeds) {
    const auto states = parallel_runs(samples, threads, [&](std::uint64_t run) {
      engine gen = make_engine(seed, run);
      d_state d(static_cast<std::size_t>(horizon), 0);
      for (int i = 0; i < step; ++i) d = d_step(d, kernel, gen);
      return d;
    });
    double chi2 = 0.0;
    int dof = 0;
    for (int n = 1; n <= horizon; ++n) {
      const double lambda = lf_eta_success(env, n);
      // Bins 0..B-1 and a tail bin, with every expected count >= min_expected.
      int bins = 0;
      while (static_cast<double>(samples) * lambda * std::pow(1 - lambda, bins + 1) >= min_expected) ++bins;
      bins = std::max(bins, 1);
      std::vector<double> observed(static_cast<std::size_t>(bins) + 1, 0.0);
      for (const auto& d : states) observed[static_cast<std::size_t>(std::min(d[static_cast<std::size_t>(n - 1)], bins))] += 1;
      for (int k = 0; k <= bins; ++k) {
        const double prob = k < bins ? lambda * std::pow(1 - lambda, k) : std::pow(1 - lambda, bins);
        const double expected = prob * static_cast<double>(samples);
        chi2 += (observed[static_cast<std::size_t>(k)] - expected) * (observed[static_cast<std::size_t>(k)] - expected) / expected;
      }
      dof += bins;
    }
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi2));
    worst = std::min(worst, p);
    detail << (detail.tellp() > 0 ? " " : "") << "seed " << seed << ": chi2=" << detail::fmt(chi2) << " dof=" << dof
           << " p=" << detail::fmt(p);
  }
  r.metric = worst;
  r.pass = worst > min_p;
  r.detail = detail.str();
  return r;
}

/// Law of the B prefix at each step from the B chain against the prefix
/// D_i(1..l_i) of the finite-population D chain.
inline check_result check_prefix_laws(const parsed_environment& parsed, int steps, double tolerance = 1e-10) {
  check_result r{"d_prefix_vs_b", environment_digest(parsed.env)};
  r.threshold = tolerance;
  enumeration_options options;
  if (parsed.exact && parsed.env.max_offspring()) {
    const auto b = b_chain_step_laws(*parsed.exact, steps, options);
    const auto d = d_chain_prefix_laws(*parsed.exact, steps, options);
    rational worst(0);
    for (int i = 0; i < steps; ++i) worst = std::max(worst, tv_distance(b[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(i)]));
    r.metric = to_double(worst);
    r.pass = worst == rational(0);
    r.detail = "rational mode";
    return r;
  }
  const auto b = b_chain_step_laws(parsed.env, steps, options);
  const auto d = d_chain_prefix_laws(parsed.env, steps, options);
  double worst = 0.0;
  for (int i = 0; i < steps; ++i) worst = std::max(worst, tv_distance(b[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(i)]));
  r.metric = worst;
  r.pass = worst < tolerance;
  return r;
}

inline check_result check_figure1() {
  check_result r{"figure1", "embedded"};
  const auto report = figure1_consistency();
  r.pass = report.pass;
  r.metric = static_cast<double>(report.mismatches.size());
  for (const auto& m : report.mismatches) r.detail += (r.detail.empty() ? "" : "; ") + m;
  return r;
}

struct witness_check_options {
  witness_options search;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Exact witness search, then a Monte Carlo re-check on simulated trees.
/// NotFound is inconclusive and does not pass.
inline check_result check_witness(const environment& env, const witness_check_options& options = {}) {
  check_result r{"btilde_witness", environment_digest(env)};
  r.threshold = options.search.threshold;
  const auto w = btilde_witness_search(env, options.search);
  if (!w) {
    r.inconclusive = true;
    r.detail = "no witness at this scale";
    return r;
  }
  r.metric = w->tv;
  std::ostringstream detail;
  detail << "step " << w->step << ": (" << w->first_past.to_string() << ", " << w->present.to_string() << ") vs ("
         << w->second_past.to_string() << ", " << w->present.to_string() << "), next=" << w->pivot
         << " exact " << detail::fmt(w->first_law.prob(w->pivot)) << " vs " << detail::fmt(w->second_law.prob(w->pivot));
  if (options.samples > 0) {
    const auto v = validate_witness(env, *w, options.samples, options.seed, options.threads);
    detail << "; simulated " << detail::fmt(v.first_freq) << " (n=" << v.first_count << ") vs "
           << detail::fmt(v.second_freq) << " (n=" << v.second_count << "), z=" << detail::fmt(v.z_score);
    r.pass = w->tv > options.search.threshold && v.same_direction && v.significant;
  } else {
    r.pass = w->tv > options.search.threshold;
  }
  r.detail = detail.str();
  return r;
}

/// pgf derivatives against central differences on a grid of s values and
/// orders, plus normalization of every eta law.
inline check_result check_numerical_hygiene(const environment& env, double fd_tolerance = 1e-6,
                                            double sum_tolerance = 1e-10) {
  check_result r{"numerical_hygiene", environment_digest(env)};
  r.threshold = fd_tolerance;
  const double h = 1e-5;
  double worst = 0.0;
  double worst_sum = 0.0;
  auto relative = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  for (const auto& law : env.laws()) {
    for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      const double fd1 = (pgf_eval(law, s + h) - pgf_eval(law, s - h)) / (2 * h);
      if (std::abs(fd1) > 1e-8) worst = std::max(worst, relative(pgf_deriv(law, s, 1), fd1));
      for (int k = 2; k <= 3; ++k) {
        const double fd = (pgf_deriv(law, s + h, k - 1) - pgf_deriv(law, s - h, k - 1)) / (2 * h);
        if (std::abs(fd) > 1e-8) worst = std::max(worst, relative(pgf_deriv(law, s, k), fd));
      }
    }
  }
  for (int m = 0; m <= env.horizon(); ++m)
    for (int n = m + 1; n <= env.horizon(); ++n)
      for (double s : {0.1, 0.5, 0.9}) {
        const double fd = (compose_range(env, -n, -m, s + h) - compose_range(env, -n, -m, s - h)) / (2 * h);
        if (std::abs(fd) > 1e-8) worst = std::max(worst, relative(compose_deriv(env, -n, -m, s), fd));
      }
  for (const auto& law : backward_eta_laws(env)) worst_sum = std::max(worst_sum, std::abs(law.total() - 1.0));
  for (int n = 1; n <= env.horizon(); ++n) worst_sum = std::max(worst_sum, std::abs(eta_pmf(env, n).total() - 1.0));
  r.metric = worst;
  r.pass = worst < fd_tolerance && worst_sum < sum_tolerance;
  r.detail = "max |sum - 1| = " + detail::fmt(worst_sum);
  return r;
}

}  // namespace gwcpp
