#pragma once

#include <sstream>
#include <vector>

#include "gwcpp/environment.hpp"
#include "gwcpp/errors.hpp"
#include "gwcpp/eta_law.hpp"
#include "gwcpp/offspring_law.hpp"

namespace gwcpp {

/// f_{m,n}(s) = f_{m+1} o ... o f_n (s), where f_{k} is the pgf of the law of
/// generation k-1. Requires -N <= m <= n <= 0; f_{n,n}(s) = s.
template <class Real>
Real compose_range(const basic_environment<Real>& env, int m, int n, Real s) {
  detail::check_range(env, m, n);
  detail::check_unit_interval(s);
  for (int g = n - 1; g >= m; --g) s = pgf_eval(env.law_for_generation(g), s);
  return s;
}

/// f'_{m,n}(s) = prod_{l=m+1}^{n} f'_l(f_{l,n}(s)), and 1 when m = n.
template <class Real>
Real compose_deriv(const basic_environment<Real>& env, int m, int n, Real s) {
  detail::check_range(env, m, n);
  detail::check_unit_interval(s);
  Real product(1);
  for (int g = n - 1; g >= m; --g) {
    const auto& law = env.law_for_generation(g);
    product *= pgf_deriv(law, s, 1);
    s = pgf_eval(law, s);
  }
  return product;
}

/// Probability that the founder (generation -N) has descendants n generations
/// later: 1 - f_{-N,-N+n}(0).
template <class Real>
Real survival_prob(const basic_environment<Real>& env, int n) {
  if (n < 0 || n > env.horizon()) {
    std::ostringstream msg;
    msg << "survival horizon " << n << " outside [0, " << env.horizon() << "]";
    throw horizon_error(msg.str());
  }
  const int founder = -env.horizon();
  return Real(1) - compose_range(env, founder, founder + n, Real(0));
}

namespace detail {

/// eta for an individual at generation g whose daughters must survive to
/// generation `target` (g < target <= 0).
template <class Real>
basic_eta_law<Real> eta_between(const basic_environment<Real>& env, int g, int target) {
  const auto& law = env.law_for_generation(g);
  const Real x = compose_range(env, g + 1, target, Real(0));
  const Real survive = Real(1) - pgf_eval(law, x);
  if (!(survive > Real(0))) {
    std::ostringstream msg;
    msg << "individuals at generation " << g << " cannot leave descendants at generation " << target;
    throw degenerate_error(msg.str());
  }
  const Real alive = Real(1) - x;
  auto term = [&](int k) {
    return power(alive, k + 1) * pgf_deriv(law, x, k + 1) / (factorial<Real>(k + 1) * survive);
  };
  if (law.is_linear_fractional()) return basic_eta_law<Real>::geometric(term(0));
  const int top = *law.max_offspring() - 1;
  std::vector<Real> pmf;
  pmf.reserve(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) pmf.push_back(term(k));
  return basic_eta_law<Real>::table(std::move(pmf));
}

}  // namespace detail

/// Law of eta_n for the founder of `env` (forward indexing, f_1 = oldest law):
/// P(eta_n = k) = (1 - f_{1,n}(0))^{k+1} f_1^{(k+1)}(f_{1,n}(0)) / ((k+1)! (1 - f_{0,n}(0))).
/// Finite-support founders give an exact finite table; linear-fractional
/// founders give a geometric law whose parameter is P(eta_n = 0) from the same
/// formula.
template <class Real>
basic_eta_law<Real> eta_pmf(const basic_environment<Real>& env, int n) {
  if (n < 1 || n > env.horizon()) throw horizon_error("eta_pmf horizon outside [1, N]");
  const int founder = -env.horizon();
  return detail::eta_between(env, founder, founder + n);
}

/// P(eta_n = k) from the generic derivative formula, whatever the law type.
template <class Real>
Real eta_prob_generic(const basic_environment<Real>& env, int n, int k) {
  if (n < 1 || n > env.horizon()) throw horizon_error("eta horizon outside [1, N]");
  if (k < 0) return Real(0);
  const int founder = -env.horizon();
  const auto& law = env.law_for_generation(founder);
  const Real x = compose_range(env, founder + 1, founder + n, Real(0));
  const Real survive = Real(1) - pgf_eval(law, x);
  if (!(survive > Real(0))) throw degenerate_error("eta undefined: zero survival probability");
  return power(Real(Real(1) - x), k + 1) * pgf_deriv(law, x, k + 1) / (factorial<Real>(k + 1) * survive);
}

/// eta^{(-m)}: the law for an individual at depth m (generation -m) relative
/// to the present generation.
template <class Real>
basic_eta_law<Real> eta_at_depth(const basic_environment<Real>& env, int m) {
  if (m < 1 || m > env.horizon()) throw horizon_error("eta depth outside [1, N]");
  return detail::eta_between(env, -m, 0);
}

/// eta^{(-m)} for every depth m = 1..N (index m-1).
template <class Real>
std::vector<basic_eta_law<Real>> backward_eta_laws(const basic_environment<Real>& env) {
  std::vector<basic_eta_law<Real>> out;
  out.reserve(static_cast<std::size_t>(env.horizon()));
  for (int m = 1; m <= env.horizon(); ++m) out.push_back(eta_at_depth(env, m));
  return out;
}

/// P(eta^{(m)} = 0) = (1 - f_{m+1,0}(0)) f'_{m+1}(f_{m+1,0}(0)) / (1 - f_{m,0}(0)),
/// for generation -N <= m <= -1.
template <class Real>
Real eta_zero_prob(const basic_environment<Real>& env, int m) {
  const auto& law = env.law_for_generation(m);
  const Real x = compose_range(env, m + 1, 0, Real(0));
  const Real survive = Real(1) - compose_range(env, m, 0, Real(0));
  if (!(survive > Real(0))) {
    std::ostringstream msg;
    msg << "eta at generation " << m << " undefined: zero survival probability";
    throw degenerate_error(msg.str());
  }
  return (Real(1) - x) * pgf_deriv(law, x, 1) / survive;
}

/// prod_{i=1}^{n} P(eta^{(-i)} = 0).
template <class Real>
Real a1_tail_product(const basic_environment<Real>& env, int n) {
  if (n < 1 || n > env.horizon()) throw horizon_error("a1_tail depth outside [1, N]");
  Real product(1);
  for (int i = 1; i <= n; ++i) product *= eta_zero_prob(env, -i);
  return product;
}

/// P(A_1 > n) = f'_{-n,0}(0) / (1 - f_{-n,0}(0)) = P(Z_n = 1 | Z_n > 0) for
/// the population founded at generation -n. Cross-checked against the
/// product of P(eta^{(-i)} = 0); a disagreement beyond 1e-12 (or any, in
/// exact arithmetic) throws inconsistent_state.
template <class Real>
Real a1_tail(const basic_environment<Real>& env, int n) {
  if (n < 1 || n > env.horizon()) throw horizon_error("a1_tail depth outside [1, N]");
  const Real survive = Real(1) - compose_range(env, -n, 0, Real(0));
  if (!(survive > Real(0))) throw degenerate_error("A_1 law undefined: zero survival probability");
  const Real closed = compose_deriv(env, -n, 0, Real(0)) / survive;
  const Real product = a1_tail_product(env, n);
  bool agree;
  if constexpr (is_exact_v<Real>) {
    agree = closed == product;
  } else {
    agree = std::abs(closed - product) <= 1e-12;
  }
  if (!agree) throw inconsistent_state("A_1 tail closed form disagrees with the eta product");
  return closed;
}

}  // namespace gwcpp
