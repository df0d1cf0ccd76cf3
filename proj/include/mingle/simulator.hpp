#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mingle/sensing.hpp"
#include "mingle/types.hpp"

namespace mingle::simulator {

/// One straight walk: heading in rad (counter-clockwise from +x), length in
/// m, constant speed in m/s. MPs are placed every speed * delta meters.
struct Leg {
  double heading = 0.0;
  double length = 1.0;
  double speed = 1.0;
};

enum class Supervision { None, Corners, Uniform };

struct ScenarioSpec {
  Vec2 site_min{0.0, 0.0};
  Vec2 site_max{36.0, 24.0};
  std::vector<Vec2> aps;  // explicit placement; when empty, ap_count on the perimeter
  int ap_count = 10;
  Vec2 start{3.0, 3.0};   // position at t = 0, one interval before the first MP
  std::vector<Leg> legs;
  double delta = 1.0;          // s
  double rtt_noise = 0.5;      // Gaussian sigma in the range domain (m)
  double nlos_prob = 0.3;
  double nlos_bias = 3.0;      // mean of the exponential NLoS excess range (m)
  double sample_rate = 100.0;  // IMU Hz
  double step_frequency = 2.0; // Hz of the accelerometer oscillation
  double gyro_noise = 0.0;     // rad/s
  double accel_noise = 0.0;    // m/s^2
  Supervision supervision = Supervision::None;
  double label_fraction = 0.1; // for Supervision::Uniform
  std::uint64_t seed = 1;

  void validate() const;
};

inline constexpr double kGravity = 9.8;
inline constexpr double kStepScale = 1.5;       // speed at which the peak-to-valley gap is 1
inline constexpr double kTurnDuration = 0.5;    // s, raised-cosine gyro pulse

struct Scenario {
  std::vector<Vec2> aps;
  Trajectory truth;
  Matrix rtt;                    // N x M round-trip times (s)
  sensing::ImuStream imu;
  std::vector<int> alpha;        // 1 where ground truth is handed to the learner
  std::vector<Course> courses;   // generator's course boundaries (empty when loaded from file)
  std::vector<double> speed_ratio;  // true speed / slowest speed, per course

  int mp_count() const { return static_cast<int>(truth.size()); }
  int ap_count() const { return static_cast<int>(aps.size()); }
};

/// `count` APs spaced evenly along the rectangle's perimeter.
std::vector<Vec2> perimeter_aps(const Vec2& lo, const Vec2& hi, int count);

/// Samples a scenario. Each range is true distance + Bernoulli(p) * Exp(mu)
/// + Normal(0, sigma), clamped at 0.1 m. The gyro carries a raised-cosine
/// pulse per turn; the accelerometer norm oscillates with peak-to-valley gap
/// (speed / kStepScale)^4. Throws ContractViolation if a leg leaves the site.
Scenario generate(const ScenarioSpec& spec);

/// "type1", "type2", "type3", "type4" or "day3".
ScenarioSpec preset(std::string_view name);

/// Labels MPs that end a course (alpha = beta).
std::vector<int> corner_mask(const std::vector<Course>& courses, int mp_count);

}  // namespace mingle::simulator
