#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mingle/errors.hpp"
#include "mingle/sensing.hpp"

using namespace mingle;
using namespace mingle::sensing;

namespace {

ImuStream constant_stream(double rate, double seconds, double gyro, double delta) {
  ImuStream s;
  s.sample_rate = rate;
  s.delta = delta;
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate)) + 1;
  s.gyro_z.assign(n, gyro);
  s.accel_norm.assign(n, 9.8);
  return s;
}

// Accelerometer stream whose oscillation amplitude changes per course.
ImuStream oscillating_stream(const std::vector<Course>& courses, const std::vector<double>& amp,
                             double rate, double freq) {
  ImuStream s;
  s.sample_rate = rate;
  s.delta = 1.0;
  const int n_mp = courses.back().last + 1;
  const auto n = static_cast<std::size_t>(std::lround((n_mp + 1) * rate)) + 1;
  s.gyro_z.assign(n, 0.0);
  s.accel_norm.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate;
    std::size_t l = 0;
    while (l + 1 < courses.size() && t > (courses[l].last + 1) * s.delta) ++l;
    s.accel_norm[k] = 10.0 + amp[l] * std::sin(2 * std::numbers::pi * freq * t);
  }
  return s;
}

}  // namespace

TEST_CASE("heading_change integrates gyro over one MP interval") {
  SUBCASE("constant integrand") {
    const auto s = constant_stream(100.0, 10.0, 0.2, 1.0);
    CHECK(heading_change(s, 0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(heading_change(s, 5) == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("zero integrand") {
    const auto s = constant_stream(100.0, 10.0, 0.0, 1.0);
    CHECK(heading_change(s, 3) == 0.0);
  }
  SUBCASE("square pulse of 1 s inside a 2 s interval") {
    // MP 0 covers (2, 4] s; the pulse lives on [2.5, 3.5].
    auto s = constant_stream(1000.0, 6.0, 0.0, 2.0);
    for (std::size_t k = 0; k < s.gyro_z.size(); ++k) {
      const double t = static_cast<double>(k) / s.sample_rate;
      if (t >= 2.5 && t <= 3.5) s.gyro_z[k] = 1.5708;
    }
    // Dense-sample quadrature of the same pulse: trapezoid edges cost half a sample each side.
    CHECK(heading_change(s, 0) == doctest::Approx(std::numbers::pi / 2).epsilon(2e-3));
  }
  SUBCASE("interval past the stream") {
    const auto s = constant_stream(100.0, 3.0, 0.1, 1.0);
    CHECK_NOTHROW(heading_change(s, 1));
    CHECK_THROWS_AS(heading_change(s, 2), std::out_of_range);
    CHECK_THROWS_AS(heading_change(s, -1), std::out_of_range);
  }
}

TEST_CASE("quantize_heading") {
  CHECK(quantize_heading(0.6, 0.5) == 1);
  CHECK(quantize_heading(0.4, 0.5) == 0);
  CHECK(quantize_heading(0.5, 0.5) == 1);
  CHECK_THROWS_AS(quantize_heading(0.5, 0.0), ContractViolation);

  SUBCASE("monotone in theta") {
    int prev = 0;
    for (double th = -1.0; th <= 2.0; th += 0.01) {
      const int q = quantize_heading(th, 0.5);
      CHECK(q >= prev);
      prev = q;
    }
  }
}

TEST_CASE("heading_flags forces the last flag") {
  const auto s = constant_stream(100.0, 10.0, 0.0, 1.0);
  const auto beta = heading_flags(s, 5);
  CHECK(beta == std::vector<int>{0, 0, 0, 0, 1});
}

TEST_CASE("segment_courses") {
  CHECK(segment_courses(std::vector<int>{0, 0, 1, 0, 0, 0, 1}) ==
        std::vector<Course>{{0, 2}, {3, 6}});
  CHECK(segment_courses(std::vector<int>{1, 1}) == std::vector<Course>{{0, 0}, {1, 1}});
  std::vector<int> one(9, 0);
  one.back() = 1;
  CHECK(segment_courses(one) == std::vector<Course>{{0, 8}});
  CHECK_THROWS_AS(segment_courses(std::vector<int>{0, 1, 0}), ContractViolation);
  CHECK_THROWS_AS(segment_courses(std::vector<int>{}), ContractViolation);

  SUBCASE("random flags give an ordered partition") {
    std::mt19937_64 rng(7);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 40);
      std::vector<int> beta(static_cast<std::size_t>(n));
      for (auto& b : beta) b = coin(rng) ? 1 : 0;
      beta.back() = 1;
      const auto courses = segment_courses(beta);
      int next = 0;
      for (const auto& c : courses) {
        REQUIRE(c.first == next);
        REQUIRE(c.last >= c.first);
        REQUIRE(beta[c.last] == 1);
        for (int i = c.first; i < c.last; ++i) REQUIRE(beta[i] == 0);
        next = c.last + 1;
      }
      CHECK(next == n);
    }
  }
}

TEST_CASE("speed_ratios") {
  const std::vector<double> a{1.0, 16.0};
  const auto v = speed_ratios(a);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(2.0).epsilon(1e-12));

  const std::vector<double> b{5.0, 5.0, 5.0};
  CHECK(speed_ratios(b) == std::vector<double>{1.0, 1.0, 1.0});

  SUBCASE("scale invariance and exact unit minimum") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 50.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> g(5);
      for (auto& x : g) x = u(rng);
      auto scaled = g;
      const double s = u(rng);
      for (auto& x : scaled) x *= s;
      const auto v1 = speed_ratios(g);
      const auto v2 = speed_ratios(scaled);
      double vmin = 1e9;
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(v1[i] == doctest::Approx(v2[i]).epsilon(1e-12));
        CHECK(v1[i] >= 1.0);
        vmin = std::min(vmin, v1[i]);
      }
      CHECK(std::abs(vmin - 1.0) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(speed_ratios(std::vector<double>{1.0, 0.0}), ContractViolation);
}

TEST_CASE("speed_variation recovers sinusoid gaps") {
  const std::vector<Course> courses{{0, 9}, {10, 19}};
  const auto s = oscillating_stream(courses, {2.0, 0.125}, 100.0, 2.0);
  const auto prof = speed_variation(s, courses);
  REQUIRE(prof.gap.size() == 2);
  CHECK(prof.gap[0] == doctest::Approx(4.0).epsilon(0.02));
  CHECK(prof.gap[1] == doctest::Approx(0.25).epsilon(0.02));
  CHECK(prof.ratio[0] == doctest::Approx(2.0).epsilon(0.02));
  CHECK(prof.ratio[1] == 1.0);
  CHECK_FALSE(prof.fallback[0]);
  CHECK_FALSE(prof.fallback[1]);
}

TEST_CASE("speed_variation falls back on flat courses") {
  const std::vector<Course> courses{{0, 9}, {10, 14}, {15, 24}};
  const auto s = oscillating_stream(courses, {1.0, 0.0, 1.0}, 100.0, 2.0);
  const auto prof = speed_variation(s, courses);
  CHECK(prof.fallback == std::vector<bool>{false, true, false});
  CHECK(prof.gap[1] == doctest::Approx(0.5 * (prof.gap[0] + prof.gap[2])));
  for (double v : prof.ratio) CHECK(v >= 1.0);
}

TEST_CASE("peak_valley_gap rejects short or flat input") {
  CHECK_FALSE(peak_valley_gap(std::vector<double>{1.0, 2.0}, 100.0).has_value());
  CHECK_FALSE(peak_valley_gap(std::vector<double>(200, 9.8), 100.0).has_value());
}

TEST_CASE("course_window bounds") {
  const auto s = constant_stream(10.0, 5.0, 0.0, 1.0);
  const auto w = course_window(s, {1, 2});
  // t in (1, 3] at 10 Hz: samples 11..30.
  CHECK(w.size() == 20);
  CHECK(w.data() == s.accel_norm.data() + 11);
}

TEST_CASE("segment_trajectory maps ratios onto MPs") {
  const std::vector<Course> courses{{0, 4}, {5, 9}};
  auto s = oscillating_stream(courses, {0.5, 8.0}, 100.0, 2.0);
  // A 90 degree turn between MP 4 and MP 5: integrated over (5, 6] s.
  for (std::size_t k = 0; k < s.gyro_z.size(); ++k) {
    const double t = static_cast<double>(k) / s.sample_rate;
    if (t > 5.25 && t < 5.75) s.gyro_z[k] = std::numbers::pi;
  }
  const auto seg = segment_trajectory(s, 10);
  CHECK(seg.courses == courses);
  CHECK(seg.course_of(4) == 0);
  CHECK(seg.course_of(5) == 1);
  const auto r = seg.ratio_per_mp();
  CHECK(r[0] == 1.0);
  CHECK(r[9] == doctest::Approx(2.0).epsilon(0.02));
}
