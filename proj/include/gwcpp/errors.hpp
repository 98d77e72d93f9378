#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gwcpp {

/// Base of every error thrown by the library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (s outside [0,1], k < 1, ...).
struct domain_error : error {
  using error::error;
};

/// Generation or depth index outside the environment horizon.
struct horizon_error : error {
  using error::error;
};

/// Individual rank or depth outside a realized tree.
struct range_error : error {
  using error::error;
};

/// Conditioning on an event of probability zero.
struct degenerate_error : error {
  using error::error;
};

/// Malformed input. `entry` names the offending environment law, or -1.
struct validation_error : error {
  validation_error(const std::string& what, std::ptrdiff_t entry = -1)
      : error(what), entry(entry) {}
  std::ptrdiff_t entry;
};

struct not_linear_fractional : error {
  using error::error;
};

/// An exact enumeration would exceed its configured state budget.
struct enumeration_guard : error {
  using error::error;
};

struct attempt_cap_exceeded : error {
  using error::error;
};

/// A simulated population outgrew its configured node budget.
struct capacity_error : error {
  using error::error;
};

/// A chain state violating its structural invariants.
struct inconsistent_state : error {
  using error::error;
};

}  // namespace gwcpp
