#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mingle/types.hpp"

namespace mingle::sensing {

/// Raw inertial samples. Sample k is taken at t = k / sample_rate, and
/// measurement point n (0-based) is sampled at t = (n + 1) * delta.
struct ImuStream {
  double sample_rate = 100.0;      // samples per second
  std::vector<double> gyro_z;      // rad/s
  std::vector<double> accel_norm;  // m/s^2
  double delta = 1.0;              // MP sampling interval (s)

  double duration() const;
};

inline constexpr double kDefaultHeadingThreshold = 0.5;  // rad
inline constexpr double kSmoothingWindowSeconds = 0.2;
inline constexpr double kProminenceFraction = 0.1;

/// Heading change while walking from MP n to MP n+1: the trapezoidal
/// integral of gyro_z over ((n+1)Δ, (n+2)Δ]. Throws std::out_of_range when
/// the interval runs past the recorded stream.
double heading_change(const ImuStream& stream, int n);

/// 1 iff theta >= threshold. Signed on purpose: only counter-clockwise turns
/// of at least `threshold` radians mark the end of a course.
int quantize_heading(double theta, double threshold);

/// Binary turn flags for `mp_count` MPs; the final flag is forced to 1.
std::vector<int> heading_flags(const ImuStream& stream, int mp_count,
                               double threshold = kDefaultHeadingThreshold);

/// Splits MPs into steady courses, each ending at a flag equal to 1.
std::vector<Course> segment_courses(std::span<const int> beta);

/// Per-course speed ratios relative to the slowest course.
struct SpeedProfile {
  std::vector<double> gap;     // mean peak-to-valley gap r per course
  std::vector<double> ratio;   // v per course, min is exactly 1
  std::vector<bool> fallback;  // true where no oscillation was detected
};

/// v = r^{1/4} / min r^{1/4}. Gaps must be positive.
std::vector<double> speed_ratios(std::span<const double> gaps);

/// Mean gap between each accepted peak and the valley that follows it, or
/// nullopt when the segment shows no usable oscillation.
std::optional<double> peak_valley_gap(std::span<const double> samples, double sample_rate);

/// Accelerometer samples that belong to a course: t in (first*Δ, (last+1)*Δ].
std::span<const double> course_window(const ImuStream& stream, const Course& course);

SpeedProfile speed_variation(const ImuStream& stream, std::span<const Course> courses);

struct CourseSegmentation {
  std::vector<int> beta;
  std::vector<Course> courses;
  SpeedProfile speed;

  /// Index of the course containing MP n.
  int course_of(int n) const;
  /// Speed ratio of the course containing each MP.
  std::vector<double> ratio_per_mp() const;
};

CourseSegmentation segment_trajectory(const ImuStream& stream, int mp_count,
                                      double threshold = kDefaultHeadingThreshold);

}  // namespace mingle::sensing
