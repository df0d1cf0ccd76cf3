#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mingle/types.hpp"

namespace mingle {

struct TrajectoryEstimate {
  Trajectory coords;
  std::string method;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<bool> flagged;  // MPs whose estimate was carried over or patched
};

struct EvalReport {
  double mae = 0.0;
  double rmse = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
  std::vector<double> cdf;  // sorted absolute errors
};

/// Percentile with linear interpolation between order statistics
/// (position p/100 * (n-1) in the sorted list).
double percentile(std::span<const double> sorted, double p);

EvalReport evaluate(std::span<const Vec2> estimate, std::span<const Vec2> truth);
inline EvalReport evaluate(const TrajectoryEstimate& estimate, std::span<const Vec2> truth) {
  return evaluate(estimate.coords, truth);
}

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace mingle
