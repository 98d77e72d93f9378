#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <type_traits>
#include <vector>

#include "gwcpp/offspring_law.hpp"

namespace gwcpp {

using engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the generator owned by run `run_id`: splitmix64(seed ^ splitmix64(run_id)).
/// Every run draws from its own stream, so results never depend on how runs
/// are spread across workers.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t run_id) {
  return splitmix64(seed ^ splitmix64(run_id));
}

inline engine make_engine(std::uint64_t seed, std::uint64_t run_id) {
  return engine(stream_seed(seed, run_id));
}

/// Uniform double in [0,1) with 53 random bits.
inline double uniform01(engine& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Draws offspring counts: inverse CDF for finite support, Bernoulli(r) then a
/// shifted geometric for linear-fractional laws.
class offspring_sampler {
 public:
  explicit offspring_sampler(const offspring_law& law) {
    if (law.is_finite()) {
      double acc = 0.0;
      for (double p : law.as_finite().probs) {
        acc += p;
        cdf_.push_back(acc);
      }
      cdf_.back() = 1.0;
    } else {
      r_ = law.as_linear_fractional().r;
      log_q_ = std::log1p(-law.as_linear_fractional().p);
    }
  }

  int operator()(engine& gen) const {
    const double u = uniform01(gen);
    if (!cdf_.empty()) {
      auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
    }
    if (u >= r_) return 0;
    const double v = uniform01(gen);
    return 1 + static_cast<int>(std::floor(std::log1p(-v) / log_q_));
  }

 private:
  std::vector<double> cdf_;
  double r_ = 0.0;
  double log_q_ = 0.0;
};

/// Evaluates fn(run_id) for run_id in [0, count) on `threads` workers and
/// returns the results in run order. The first exception thrown by any run is
/// rethrown after all workers join.
template <class Fn>
auto parallel_runs(std::uint64_t count, int threads, Fn&& fn) {
  using result_type = std::decay_t<decltype(fn(std::uint64_t{}))>;
  std::vector<result_type> results(count);
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    for (std::uint64_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (count + static_cast<std::uint64_t>(threads) - 1) / static_cast<std::uint64_t>(threads);
  for (int w = 0; w < threads; ++w) {
    const std::uint64_t begin = std::min(count, chunk * static_cast<std::uint64_t>(w));
    const std::uint64_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::uint64_t i = begin; i < end; ++i) results[i] = fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace gwcpp
