#pragma once

#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "gwcpp/errors.hpp"
#include "gwcpp/offspring_law.hpp"

namespace gwcpp {

/// Finite-horizon varying environment.
///
/// The founder lives at generation -N. Laws are stored oldest to newest:
/// slot j holds the offspring law of individuals at generation -N + j, so the
/// last slot is the law of generation -1. Generations are numbered in Z_-,
/// with 0 the present. Depth n >= 1 means generation -n.
///
/// Every translation between generations, depths and storage slots lives in
/// this class; the rest of the library only calls the accessors below.
template <class Real>
class basic_environment {
 public:
  using law_type = basic_offspring_law<Real>;
  using value_type = Real;

  explicit basic_environment(std::vector<law_type> laws) : laws_(std::move(laws)) {
    if (laws_.empty()) throw validation_error("environment needs at least one generation");
  }

  int horizon() const { return static_cast<int>(laws_.size()); }

  /// Offspring law of individuals at generation m, -N <= m <= -1.
  const law_type& law_for_generation(int m) const {
    if (m < -horizon() || m > -1) {
      std::ostringstream msg;
      msg << "generation " << m << " outside [-" << horizon() << ", -1]";
      throw horizon_error(msg.str());
    }
    return laws_[static_cast<std::size_t>(m + horizon())];
  }

  /// Offspring law of individuals at depth n (generation -n), 1 <= n <= N.
  const law_type& law_at_depth(int n) const { return law_for_generation(-n); }

  /// Storage slot j (oldest first).
  const law_type& slot(std::size_t j) const { return laws_.at(j); }
  const std::vector<law_type>& laws() const { return laws_; }

  bool is_linear_fractional() const {
    for (const auto& l : laws_)
      if (!l.is_linear_fractional()) return false;
    return true;
  }

  bool is_finite_support() const {
    for (const auto& l : laws_)
      if (!l.is_finite()) return false;
    return true;
  }

  /// Largest offspring count over all generations; nullopt if any law is unbounded.
  std::optional<int> max_offspring() const {
    int best = 0;
    for (const auto& l : laws_) {
      auto m = l.max_offspring();
      if (!m) return std::nullopt;
      best = std::max(best, *m);
    }
    return best;
  }

  template <class To>
  basic_environment<To> convert() const {
    std::vector<basic_offspring_law<To>> out;
    out.reserve(laws_.size());
    for (const auto& l : laws_) out.push_back(l.template convert<To>());
    return basic_environment<To>(std::move(out));
  }

  friend bool operator==(const basic_environment& a, const basic_environment& b) { return a.laws_ == b.laws_; }

 private:
  std::vector<law_type> laws_;
};

using environment = basic_environment<double>;
using exact_environment = basic_environment<rational>;

/// Drops the k oldest generations: the shifted environment whose founder sits
/// at generation -(N - k). Shifting by N is rejected since an environment is
/// never empty.
template <class Real>
basic_environment<Real> shift(const basic_environment<Real>& env, int k) {
  if (k < 0 || k >= env.horizon()) {
    std::ostringstream msg;
    msg << "shift " << k << " outside [0, " << env.horizon() - 1 << "]";
    throw horizon_error(msg.str());
  }
  std::vector<basic_offspring_law<Real>> laws(env.laws().begin() + k, env.laws().end());
  return basic_environment<Real>(std::move(laws));
}

/// The most recent n generations as a stand-alone environment with founder at -n.
template <class Real>
basic_environment<Real> restrict_to_depth(const basic_environment<Real>& env, int n) {
  if (n < 1 || n > env.horizon()) {
    std::ostringstream msg;
    msg << "depth " << n << " outside [1, " << env.horizon() << "]";
    throw horizon_error(msg.str());
  }
  return shift(env, env.horizon() - n);
}

/// Parameters of a linear-fractional pgf. p == 1 is allowed here so that the
/// identity f_{n,n}(s) = s (r = p = 1) is representable.
template <class Real>
struct lf_params {
  Real r;
  Real p;

  Real q() const { return Real(1) - p; }
  Real mean() const { return r / p; }
  /// f''(1) / f'(1)^2 = 2q / r.
  Real nsfm() const { return Real(2) * q() / r; }

  Real pgf(const Real& s) const { return Real(1) - r * (Real(1) - s) / (Real(1) - q() * s); }

  static lf_params from_moments(const Real& mean, const Real& nsfm) {
    const Real denom = Real(2) + mean * nsfm;
    return {Real(2) * mean / denom, Real(2) / denom};
  }
};

namespace detail {

template <class Real>
void check_range(const basic_environment<Real>& env, int m, int n) {
  if (m < -env.horizon() || n > 0 || m > n) {
    std::ostringstream msg;
    msg << "range (" << m << ", " << n << ") outside -" << env.horizon() << " <= m <= n <= 0";
    throw horizon_error(msg.str());
  }
}

}  // namespace detail

/// Linear-fractional parameters of f_{m,n}, the composition of the laws of
/// generations m, ..., n-1, from the mean product and the normalized second
/// factorial moment recursion.
template <class Real>
lf_params<Real> lf_compose(const basic_environment<Real>& env, int m, int n) {
  detail::check_range(env, m, n);
  if (m == n) return {Real(1), Real(1)};
  for (int g = m; g < n; ++g) {
    const auto& lf = env.law_for_generation(g).as_linear_fractional();
    if (lf.r == Real(0)) return {Real(0), Real(1)};
  }
  Real mean(1);
  Real nsfm(0);
  Real inverse_mean_prefix(1);  // 1 / (f'_{m+1}(1) ... f'_{k-1}(1))
  for (int g = m; g < n; ++g) {
    const auto& lf = env.law_for_generation(g).as_linear_fractional();
    nsfm += inverse_mean_prefix * Real(2) * lf.q() / lf.r;
    mean *= lf.r / lf.p;
    inverse_mean_prefix *= lf.p / lf.r;
  }
  return lf_params<Real>::from_moments(mean, nsfm);
}

/// Coefficients s_i, -n+1 <= i <= 0, ordered by increasing i (element 0 is
/// s_{-n+1}, the last is s_0). s_i uses the law of generation i-1:
/// s_i = ((1-p_i)/p_i) * (r_{i+1} ... r_0) / (p_{i+1} ... p_0).
template <class Real>
std::vector<Real> lf_s_coefficients(const basic_environment<Real>& env, int n) {
  if (n < 1 || n > env.horizon()) throw horizon_error("lf_s_coefficients depth outside horizon");
  std::vector<Real> out(static_cast<std::size_t>(n));
  Real ratio(1);  // (r_{i+1} ... r_0) / (p_{i+1} ... p_0)
  for (int depth = 1; depth <= n; ++depth) {
    const auto& lf = env.law_at_depth(depth).as_linear_fractional();
    out[static_cast<std::size_t>(n - depth)] = lf.q() / lf.p * ratio;
    ratio *= lf.r / lf.p;
  }
  return out;
}

/// P(A_1 > n) = (1 + sum_{i=-n+1}^{0} s_i)^{-1} for a linear-fractional environment.
template <class Real>
Real lf_a1_tail(const basic_environment<Real>& env, int n) {
  Real total(1);
  for (const auto& s : lf_s_coefficients(env, n)) total += s;
  return Real(1) / total;
}

/// Success probability lambda_n of the geometric law of eta^{(-n)} in a
/// linear-fractional environment: lambda_1 = p_0 and
/// lambda_n = (1 + sum_{k=-n+2}^0 s_k) / (1 + sum_{k=-n+1}^0 s_k).
template <class Real>
Real lf_eta_success(const basic_environment<Real>& env, int n) {
  auto s = lf_s_coefficients(env, n);
  Real outer(1);
  for (const auto& x : s) outer += x;
  const Real inner = outer - s.front();
  return inner / outer;
}

}  // namespace gwcpp
