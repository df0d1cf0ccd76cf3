#pragma once

#include <span>

#include "mingle/types.hpp"

namespace mingle::geometry {

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s
inline constexpr double kMaxConditionNumber = 1e8;

/// Range implied by a round-trip time: c * tau / 2.
double rtt_to_range(double tau);

/// Round-trip time of a given one-way range.
double range_to_rtt(double range);

/// Linear least-squares multilateration with reference selection.
///
/// The AP with the smallest measured range becomes the reference (ties go
/// to the lower index). Subtracting its circle equation from every other
/// AP's yields A x = h, solved through the 2x2 normal equations.
/// Throws DegenerateGeometry when cond(A^T A) exceeds kMaxConditionNumber.
Vec2 lls_multilaterate(std::span<const Vec2> aps, std::span<const double> ranges);

/// Absolute ranging error | ||ap - gt|| - c * tau / 2 |.
double ranging_error(const Vec2& ap, const Vec2& gt, double tau);

}  // namespace mingle::geometry
