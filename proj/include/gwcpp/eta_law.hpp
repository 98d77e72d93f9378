#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "gwcpp/errors.hpp"
#include "gwcpp/scalar.hpp"

namespace gwcpp {

/// Law of eta: the number of extra surviving daughters of an individual
/// conditioned to have at least one surviving daughter.
///
/// Finite tables are exact. Geometric laws (number of failures before the
/// first success, success probability `success`) are kept symbolic and
/// materialized on demand.
template <class Real>
class basic_eta_law {
 public:
  static basic_eta_law table(std::vector<Real> pmf) {
    if (pmf.empty()) throw validation_error("eta table must not be empty");
    while (pmf.size() > 1 && pmf.back() == Real(0)) pmf.pop_back();
    basic_eta_law law;
    law.pmf_ = std::move(pmf);
    return law;
  }

  static basic_eta_law geometric(Real success) {
    if (!(success > Real(0) && success <= Real(1))) throw domain_error("geometric success probability must lie in (0,1]");
    basic_eta_law law;
    law.success_ = std::move(success);
    return law;
  }

  bool is_geometric() const { return success_.has_value(); }
  const Real& success() const { return success_.value(); }

  /// Largest value with positive mass; nullopt if unbounded.
  std::optional<int> max_value() const {
    if (is_geometric()) {
      if (*success_ == Real(1)) return 0;
      return std::nullopt;
    }
    return static_cast<int>(pmf_.size()) - 1;
  }

  Real prob(int k) const {
    if (k < 0) return Real(0);
    if (is_geometric()) return *success_ * power(Real(Real(1) - *success_), k);
    return static_cast<std::size_t>(k) < pmf_.size() ? pmf_[static_cast<std::size_t>(k)] : Real(0);
  }

  /// P(eta >= k).
  Real tail_from(int k) const {
    if (k <= 0) return Real(1);
    if (is_geometric()) return power(Real(Real(1) - *success_), k);
    Real t(0);
    for (std::size_t j = static_cast<std::size_t>(k); j < pmf_.size(); ++j) t += pmf_[j];
    return t;
  }

  Real total() const {
    if (is_geometric()) return Real(1);
    Real t(0);
    for (const auto& x : pmf_) t += x;
    return t;
  }

  /// Table of P(eta = k) for k up to the point where the remaining tail mass
  /// drops below `tail_tolerance` (the whole table for finite laws).
  std::vector<Real> materialize(double tail_tolerance = 1e-12) const {
    if (!is_geometric()) return pmf_;
    std::vector<Real> out;
    for (int k = 0;; ++k) {
      out.push_back(prob(k));
      if (to_double(tail_from(k + 1)) < tail_tolerance) break;
    }
    return out;
  }

  template <class To>
  basic_eta_law<To> convert() const {
    if (is_geometric()) return basic_eta_law<To>::geometric(convert_scalar<To>(*success_));
    std::vector<To> out;
    for (const auto& x : pmf_) out.push_back(convert_scalar<To>(x));
    return basic_eta_law<To>::table(std::move(out));
  }

 private:
  basic_eta_law() = default;

  std::vector<Real> pmf_;
  std::optional<Real> success_;
};

using eta_law = basic_eta_law<double>;

/// Inverse-CDF sampler for an eta law; geometric laws are sampled directly.
class eta_sampler {
 public:
  explicit eta_sampler(const eta_law& law) {
    if (law.is_geometric()) {
      success_ = law.success();
    } else {
      double acc = 0.0;
      const int top = *law.max_value();
      for (int k = 0; k <= top; ++k) {
        acc += law.prob(k);
        cdf_.push_back(acc);
      }
      cdf_.back() = 1.0;
    }
  }

  /// Maps u in [0,1) to a value.
  int operator()(double u) const {
    if (success_) {
      if (*success_ >= 1.0) return 0;
      // P(eta >= k) = (1-lambda)^k; invert on 1-u in (0,1].
      return static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-*success_)));
    }
    for (std::size_t k = 0; k < cdf_.size(); ++k)
      if (u < cdf_[k]) return static_cast<int>(k);
    return static_cast<int>(cdf_.size()) - 1;
  }

 private:
  std::vector<double> cdf_;
  std::optional<double> success_;
};

}  // namespace gwcpp
