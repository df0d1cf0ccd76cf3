#include "mingle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mingle/errors.hpp"

namespace mingle {

double percentile(std::span<const double> sorted, double p) {
  require(!sorted.empty(), "percentile: empty list");
  require(p >= 0.0 && p <= 100.0, "percentile: p must be in [0, 100]");
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

EvalReport evaluate(std::span<const Vec2> estimate, std::span<const Vec2> truth) {
  require(estimate.size() == truth.size(), "evaluate: estimate and truth lengths differ");
  require(!truth.empty(), "evaluate: empty trajectory");
  EvalReport r;
  r.cdf.reserve(truth.size());
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = (estimate[i] - truth[i]).norm();
    r.cdf.push_back(e);
    sum += e;
    sq += e * e;
  }
  const auto n = static_cast<double>(truth.size());
  r.mae = sum / n;
  r.rmse = std::sqrt(sq / n);
  std::sort(r.cdf.begin(), r.cdf.end());
  r.p50 = percentile(r.cdf, 50.0);
  r.p75 = percentile(r.cdf, 75.0);
  r.p95 = percentile(r.cdf, 95.0);
  return r;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mingle
