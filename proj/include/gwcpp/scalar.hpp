#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include "gwcpp/errors.hpp"

namespace gwcpp {

/// Exact rational arithmetic used by the small-horizon oracles.
using rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

template <class Real>
inline constexpr bool is_exact_v = !std::is_floating_point_v<Real>;

template <class Real>
double to_double(const Real& x) {
  if constexpr (std::is_floating_point_v<Real>) {
    return static_cast<double>(x);
  } else {
    return x.template convert_to<double>();
  }
}

/// Exact conversion; every finite double is a dyadic rational.
template <class Real>
Real from_double(double x) {
  return Real(x);
}

template <class To, class From>
To convert_scalar(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_floating_point_v<To>) {
    return static_cast<To>(to_double(x));
  } else {
    return To(x);
  }
}

template <class Real>
Real power(Real base, int exponent) {
  Real result(1);
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

template <class Real>
Real factorial(int k) {
  Real result(1);
  for (int i = 2; i <= k; ++i) result *= Real(i);
  return result;
}

template <class Real>
Real abs_value(const Real& x) {
  return x < Real(0) ? Real(-x) : x;
}

/// Parses "a/b", an integer, or a decimal literal ("0.125") into an exact rational.
inline rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  if (s.empty()) throw validation_error("empty rational literal");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      boost::multiprecision::cpp_int num(s.substr(0, slash));
      boost::multiprecision::cpp_int den(s.substr(slash + 1));
      if (den == 0) throw validation_error("zero denominator in '" + s + "'");
      return rational(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      boost::multiprecision::cpp_int num(digits.empty() ? "0" : digits);
      boost::multiprecision::cpp_int den(1);
      for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
      return rational(num, den);
    }
    return rational(boost::multiprecision::cpp_int(s));
  } catch (const validation_error&) {
    throw;
  } catch (const std::exception&) {
    throw validation_error("malformed rational literal '" + s + "'");
  }
}

}  // namespace gwcpp
