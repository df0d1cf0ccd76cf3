#include "mingle/geometry.hpp"

#include <cmath>

#include "mingle/errors.hpp"

namespace mingle::geometry {

double rtt_to_range(double tau) {
  require(tau > 0.0 && std::isfinite(tau), "rtt_to_range: RTT must be positive and finite");
  return kSpeedOfLight * tau / 2.0;
}

double range_to_rtt(double range) { return 2.0 * range / kSpeedOfLight; }

Vec2 lls_multilaterate(std::span<const Vec2> aps, std::span<const double> ranges) {
  require(aps.size() >= 3, "lls_multilaterate: need at least 3 APs");
  require(aps.size() == ranges.size(), "lls_multilaterate: AP/range count mismatch");

  std::size_t ref = 0;
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i] < ranges[ref]) ref = i;
  }
  const Vec2& zr = aps[ref];
  const double dr = ranges[ref];

  // Row i: 2 (z_i - z_r)^T x = |z_i|^2 - |z_r|^2 - d_i^2 + d_r^2
  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Vec2 rhs = Vec2::Zero();
  for (std::size_t i = 0; i < aps.size(); ++i) {
    if (i == ref) continue;
    const Vec2 row = 2.0 * (aps[i] - zr);
    const double h = aps[i].squaredNorm() - zr.squaredNorm() - ranges[i] * ranges[i] + dr * dr;
    normal += row * row.transpose();
    rhs += row * h;
  }

  // Symmetric 2x2: eigenvalues from trace and determinant.
  const double tr = normal.trace();
  const double det = normal.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double lmax = tr / 2.0 + disc;
  const double lmin = lmax > 0.0 ? det / lmax : 0.0;
  if (!(lmin > 0.0) || lmax / lmin > kMaxConditionNumber) {
    throw DegenerateGeometry("lls_multilaterate: degenerate AP geometry");
  }
  const Vec2 x = normal.llt().solve(rhs);
  if (!x.allFinite()) throw DegenerateGeometry("lls_multilaterate: non-finite solution");
  return x;
}

double ranging_error(const Vec2& ap, const Vec2& gt, double tau) {
  return std::abs((ap - gt).norm() - rtt_to_range(tau));
}

}  // namespace mingle::geometry
