#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gwcpp/errors.hpp"
#include "gwcpp/scalar.hpp"

namespace gwcpp {

/// Offspring law with finite support {0, ..., K_max}.
template <class Real>
struct finite_support {
  std::vector<Real> probs;
};

/// P(xi = 0) = 1 - r and P(xi = k) = r p q^(k-1) for k >= 1, q = 1 - p.
template <class Real>
struct linear_fractional {
  Real r;
  Real p;
  Real q() const { return Real(1) - p; }
};

/// A probability law on {0, 1, 2, ...}, either finite-support or
/// linear-fractional. Immutable after construction.
template <class Real>
class basic_offspring_law {
 public:
  using value_type = Real;

  /// Validates non-negativity and normalization (within 1e-12 for doubles,
  /// exactly for rationals). Trailing zero masses are dropped.
  static basic_offspring_law finite(std::vector<Real> probs) {
    if (probs.empty()) throw validation_error("finite-support law needs at least one probability");
    Real total(0);
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (!(probs[k] >= Real(0))) {
        std::ostringstream msg;
        msg << "probability of " << k << " offspring is negative or NaN";
        throw validation_error(msg.str());
      }
      total += probs[k];
    }
    if constexpr (is_exact_v<Real>) {
      if (total != Real(1)) {
        throw validation_error("probabilities sum to " + total.str() + ", not exactly 1");
      }
    } else {
      if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "probabilities sum to " << total << ", not 1 within 1e-12";
        throw validation_error(msg.str());
      }
    }
    while (probs.size() > 1 && probs.back() == Real(0)) probs.pop_back();
    return basic_offspring_law(finite_support<Real>{std::move(probs)});
  }

  /// Requires 0 <= r <= 1 and 0 < p < 1.
  static basic_offspring_law linear_fractional_law(Real r, Real p) {
    if (!(r >= Real(0) && r <= Real(1))) throw validation_error("linear-fractional r must lie in [0,1]");
    if (!(p > Real(0) && p < Real(1))) throw validation_error("linear-fractional p must lie in (0,1)");
    return basic_offspring_law(linear_fractional<Real>{std::move(r), std::move(p)});
  }

  static basic_offspring_law dirac(int k) {
    if (k < 0) throw validation_error("Dirac law needs a non-negative atom");
    std::vector<Real> probs(static_cast<std::size_t>(k) + 1, Real(0));
    probs.back() = Real(1);
    return basic_offspring_law(finite_support<Real>{std::move(probs)});
  }

  bool is_linear_fractional() const { return std::holds_alternative<linear_fractional<Real>>(rep_); }
  bool is_finite() const { return !is_linear_fractional(); }

  const finite_support<Real>& as_finite() const { return std::get<finite_support<Real>>(rep_); }
  const linear_fractional<Real>& as_linear_fractional() const {
    if (!is_linear_fractional()) throw not_linear_fractional("offspring law is not linear fractional");
    return std::get<linear_fractional<Real>>(rep_);
  }

  /// Largest offspring count with positive mass; nullopt for unbounded support.
  std::optional<int> max_offspring() const {
    if (is_finite()) return static_cast<int>(as_finite().probs.size()) - 1;
    if (as_linear_fractional().r == Real(0)) return 0;
    return std::nullopt;
  }

  Real pmf(int k) const {
    if (k < 0) return Real(0);
    if (is_finite()) {
      const auto& probs = as_finite().probs;
      return static_cast<std::size_t>(k) < probs.size() ? probs[static_cast<std::size_t>(k)] : Real(0);
    }
    const auto& lf = as_linear_fractional();
    if (k == 0) return Real(1) - lf.r;
    return lf.r * lf.p * power(lf.q(), k - 1);
  }

  /// P(xi > k).
  Real tail(int k) const {
    if (k < 0) return Real(1);
    if (is_finite()) {
      Real t(0);
      const auto& probs = as_finite().probs;
      for (std::size_t j = static_cast<std::size_t>(k) + 1; j < probs.size(); ++j) t += probs[j];
      return t;
    }
    const auto& lf = as_linear_fractional();
    return lf.r * power(lf.q(), k);
  }

  template <class To>
  basic_offspring_law<To> convert() const {
    if (is_finite()) {
      std::vector<To> probs;
      probs.reserve(as_finite().probs.size());
      for (const auto& x : as_finite().probs) probs.push_back(convert_scalar<To>(x));
      return basic_offspring_law<To>::from_rep(finite_support<To>{std::move(probs)});
    }
    const auto& lf = as_linear_fractional();
    return basic_offspring_law<To>::from_rep(
        linear_fractional<To>{convert_scalar<To>(lf.r), convert_scalar<To>(lf.p)});
  }

  template <class Rep>
  static basic_offspring_law from_rep(Rep rep) {
    return basic_offspring_law(std::move(rep));
  }

  friend bool operator==(const basic_offspring_law& a, const basic_offspring_law& b) {
    if (a.is_finite() != b.is_finite()) return false;
    if (a.is_finite()) return a.as_finite().probs == b.as_finite().probs;
    return a.as_linear_fractional().r == b.as_linear_fractional().r &&
           a.as_linear_fractional().p == b.as_linear_fractional().p;
  }

 private:
  explicit basic_offspring_law(finite_support<Real> f) : rep_(std::move(f)) {}
  explicit basic_offspring_law(linear_fractional<Real> lf) : rep_(std::move(lf)) {}

  std::variant<finite_support<Real>, linear_fractional<Real>> rep_;
};

using offspring_law = basic_offspring_law<double>;
using exact_offspring_law = basic_offspring_law<rational>;

namespace detail {

template <class Real>
void check_unit_interval(const Real& s) {
  if (!(s >= Real(0) && s <= Real(1))) throw domain_error("pgf argument must lie in [0,1]");
}

// Round-off can push a double pgf value a few ulps past 1.
template <class Real>
Real clamp_unit(Real x) {
  if constexpr (!is_exact_v<Real>) {
    if (x > Real(1)) return Real(1);
    if (x < Real(0)) return Real(0);
  }
  return x;
}

}  // namespace detail

/// E[s^xi].
template <class Real>
Real pgf_eval(const basic_offspring_law<Real>& law, const Real& s) {
  detail::check_unit_interval(s);
  if (law.is_finite()) {
    const auto& probs = law.as_finite().probs;
    Real acc(0);
    for (auto it = probs.rbegin(); it != probs.rend(); ++it) acc = acc * s + *it;
    return detail::clamp_unit(acc);
  }
  const auto& lf = law.as_linear_fractional();
  return detail::clamp_unit(Real(Real(1) - lf.r * (Real(1) - s) / (Real(1) - lf.q() * s)));
}

/// k-th derivative of the pgf at s. Finite support uses the falling-factorial
/// sum E[xi (xi-1) ... (xi-k+1) s^(xi-k)]; linear-fractional uses
/// k! r p q^(k-1) / (1 - q s)^(k+1).
template <class Real>
Real pgf_deriv(const basic_offspring_law<Real>& law, const Real& s, int k) {
  detail::check_unit_interval(s);
  if (k < 1) throw domain_error("derivative order must be at least 1");
  if (law.is_finite()) {
    const auto& probs = law.as_finite().probs;
    const int top = static_cast<int>(probs.size()) - 1;
    if (top < k) return Real(0);
    Real acc(0);
    for (int j = top; j >= k; --j) {
      Real falling(1);
      for (int t = 0; t < k; ++t) falling *= Real(j - t);
      acc = acc * s + probs[static_cast<std::size_t>(j)] * falling;
    }
    return acc;
  }
  const auto& lf = law.as_linear_fractional();
  const Real q = lf.q();
  return factorial<Real>(k) * lf.r * lf.p * power(q, k - 1) / power(Real(Real(1) - q * s), k + 1);
}

template <class Real>
Real mean(const basic_offspring_law<Real>& law) {
  return pgf_deriv(law, Real(1), 1);
}

}  // namespace gwcpp
