#include "mingle/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mingle/errors.hpp"
#include "mingle/geometry.hpp"

namespace mingle::simulator {

namespace {

constexpr double kMinRange = 0.1;
constexpr double kBoundsSlack = 1e-9;

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a <= 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

bool inside(const Vec2& p, const ScenarioSpec& s) {
  return p.x() >= s.site_min.x() - kBoundsSlack && p.y() >= s.site_min.y() - kBoundsSlack &&
         p.x() <= s.site_max.x() + kBoundsSlack && p.y() <= s.site_max.y() + kBoundsSlack;
}

Leg east(double length, double speed = 1.0) { return {0.0, length, speed}; }
Leg north(double length, double speed = 1.0) { return {std::numbers::pi / 2, length, speed}; }
Leg west(double length, double speed = 1.0) { return {std::numbers::pi, length, speed}; }
Leg south(double length, double speed = 1.0) { return {3 * std::numbers::pi / 2, length, speed}; }

}  // namespace

void ScenarioSpec::validate() const {
  require(!legs.empty(), "scenario: at least one leg required");
  for (const auto& leg : legs) {
    require(leg.speed > 0.0 && leg.length > 0.0, "scenario: legs need positive speed and length");
  }
  require(delta >= kTurnDuration, "scenario: delta must cover the turn pulse");
  require(nlos_prob >= 0.0 && nlos_prob <= 1.0, "scenario: NLoS probability must be in [0, 1]");
  require(rtt_noise >= 0.0 && nlos_bias >= 0.0, "scenario: noise scales must be non-negative");
  require(sample_rate > 0.0 && step_frequency > 0.0, "scenario: IMU rates must be positive");
  require(site_max.x() > site_min.x() && site_max.y() > site_min.y(), "scenario: empty site");
  require(aps.empty() ? ap_count >= 3 : aps.size() >= 3, "scenario: need at least 3 APs");
  require(label_fraction >= 0.0 && label_fraction <= 1.0, "scenario: label fraction in [0, 1]");
}

std::vector<Vec2> perimeter_aps(const Vec2& lo, const Vec2& hi, int count) {
  require(count >= 3, "perimeter_aps: need at least 3 APs");
  const double w = hi.x() - lo.x();
  const double h = hi.y() - lo.y();
  const double perimeter = 2.0 * (w + h);
  std::vector<Vec2> aps;
  for (int i = 0; i < count; ++i) {
    double s = (i + 0.5) * perimeter / count;
    if (s < w) {
      aps.emplace_back(lo.x() + s, lo.y());
    } else if ((s -= w) < h) {
      aps.emplace_back(hi.x(), lo.y() + s);
    } else if ((s -= h) < w) {
      aps.emplace_back(hi.x() - s, hi.y());
    } else {
      s -= w;
      aps.emplace_back(lo.x(), hi.y() - s);
    }
  }
  return aps;
}

std::vector<int> corner_mask(const std::vector<Course>& courses, int mp_count) {
  std::vector<int> alpha(static_cast<std::size_t>(mp_count), 0);
  for (const auto& c : courses) alpha[c.last] = 1;
  return alpha;
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Scenario sc;
  sc.aps = spec.aps.empty() ? perimeter_aps(spec.site_min, spec.site_max, spec.ap_count) : spec.aps;

  // Trajectory: each leg contributes round(length / (speed * delta)) MPs.
  std::vector<double> course_speed;
  Vec2 pos = spec.start;
  for (const auto& leg : spec.legs) {
    const double spacing = leg.speed * spec.delta;
    const int count = std::max(1, static_cast<int>(std::lround(leg.length / spacing)));
    const Vec2 dir(std::cos(leg.heading), std::sin(leg.heading));
    const int first = sc.mp_count();
    for (int k = 1; k <= count; ++k) {
      const Vec2 p = pos + k * spacing * dir;
      require(inside(p, spec), "scenario: trajectory leaves the site bounds");
      sc.truth.push_back(p);
    }
    pos = sc.truth.back();
    sc.courses.push_back({first, sc.mp_count() - 1});
    course_speed.push_back(leg.speed);
  }
  const int n_mp = sc.mp_count();
  const double slowest = *std::min_element(course_speed.begin(), course_speed.end());
  for (double s : course_speed) sc.speed_ratio.push_back(s / slowest);

  // Ranges and RTTs. Every (MP, AP) pair draws the same three variates
  // regardless of the noise settings, so scenarios that differ only in
  // (p, mu, sigma) share their randomness.
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n_ap = sc.ap_count();
  sc.rtt.resize(n_mp, n_ap);
  for (int n = 0; n < n_mp; ++n) {
    for (int m = 0; m < n_ap; ++m) {
      const double u_nlos = unit(rng);
      const double u_bias = unit(rng);
      const double z = gauss(rng);
      double range = (sc.aps[m] - sc.truth[n]).norm();
      if (u_nlos < spec.nlos_prob) range += -spec.nlos_bias * std::log1p(-u_bias);
      range += spec.rtt_noise * z;
      sc.rtt(n, m) = geometry::range_to_rtt(std::max(range, kMinRange));
    }
  }

  // IMU stream: MP n is sampled at (n + 1) * delta.
  auto& imu = sc.imu;
  imu.sample_rate = spec.sample_rate;
  imu.delta = spec.delta;
  const auto last_sample = static_cast<std::size_t>(std::lround(n_mp * spec.delta * spec.sample_rate));
  imu.gyro_z.assign(last_sample + 1, 0.0);
  imu.accel_norm.assign(last_sample + 1, kGravity);

  std::mt19937_64 imu_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> imu_gauss(0.0, 1.0);

  for (std::size_t l = 0; l + 1 < spec.legs.size(); ++l) {
    const double turn = wrap_angle(spec.legs[l + 1].heading - spec.legs[l].heading);
    const double t0 = (sc.courses[l].last + 1) * spec.delta + 0.5 * (spec.delta - kTurnDuration);
    const double t1 = t0 + kTurnDuration;
    const auto k0 = static_cast<std::size_t>(std::ceil(t0 * spec.sample_rate));
    const auto k1 = std::min(last_sample, static_cast<std::size_t>(std::floor(t1 * spec.sample_rate)));
    for (std::size_t k = k0; k <= k1; ++k) {
      const double t = static_cast<double>(k) / spec.sample_rate;
      imu.gyro_z[k] += turn / kTurnDuration *
                       (1.0 - std::cos(2.0 * std::numbers::pi * (t - t0) / kTurnDuration));
    }
  }

  std::size_t course = 0;
  for (std::size_t k = 0; k <= last_sample; ++k) {
    const double t = static_cast<double>(k) / spec.sample_rate;
    while (course + 1 < sc.courses.size() && t > (sc.courses[course].last + 1) * spec.delta) ++course;
    const double gap = std::pow(course_speed[course] / kStepScale, 4.0);
    imu.accel_norm[k] += 0.5 * gap * std::sin(2.0 * std::numbers::pi * spec.step_frequency * t);
    if (spec.gyro_noise > 0.0) imu.gyro_z[k] += spec.gyro_noise * imu_gauss(imu_rng);
    if (spec.accel_noise > 0.0) imu.accel_norm[k] += spec.accel_noise * imu_gauss(imu_rng);
  }

  switch (spec.supervision) {
    case Supervision::None:
      sc.alpha.assign(static_cast<std::size_t>(n_mp), 0);
      break;
    case Supervision::Corners:
      sc.alpha = corner_mask(sc.courses, n_mp);
      break;
    case Supervision::Uniform: {
      std::vector<int> order(static_cast<std::size_t>(n_mp));
      for (int i = 0; i < n_mp; ++i) order[i] = i;
      std::mt19937_64 label_rng(spec.seed + 0x51ED);
      std::shuffle(order.begin(), order.end(), label_rng);
      sc.alpha.assign(static_cast<std::size_t>(n_mp), 0);
      const auto take = static_cast<std::size_t>(std::lround(spec.label_fraction * n_mp));
      for (std::size_t i = 0; i < take; ++i) sc.alpha[order[i]] = 1;
      break;
    }
  }
  return sc;
}

ScenarioSpec preset(std::string_view name) {
  ScenarioSpec s;
  if (name == "type1") {
    s.start = {5.0, 5.0};
    s.legs = {east(25), north(10), west(25), south(10)};  // 70 MPs
  } else if (name == "type2") {
    s.start = {12.0, 8.0};
    s.legs = {east(12), north(5), west(12), south(5)};  // 34 MPs
  } else if (name == "type3" || name == "day3") {
    // Vertical legs walked 1.5x faster than horizontal ones.
    s.start = {3.0, 3.0};
    s.legs = {east(30), north(18, 1.5), west(30), south(16.5, 1.5)};  // 83 MPs
    if (name == "day3") {
      s.rtt_noise *= 2.0;
      s.nlos_bias *= 2.0;
    }
  } else if (name == "type4") {
    // Two laps of the same rectangle, the second one cut short.
    s.start = {10.0, 7.0};
    s.legs = {east(16), north(8), west(16), south(8),
              east(16), north(8), west(16), south(7)};  // 95 MPs
  } else {
    throw ContractViolation("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

}  // namespace mingle::simulator
