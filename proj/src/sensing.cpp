#include "mingle/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mingle/errors.hpp"

namespace mingle::sensing {

namespace {

constexpr double kFlatSpread = 1e-9;  // m/s^2, below this the stream is treated as flat
constexpr double kIndexSlack = 1e-9;

double sample_at(const std::vector<double>& s, double fs, double t) {
  const double pos = t * fs;
  auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(k);
  return s[k] + frac * (s[k + 1] - s[k]);
}

// Trapezoidal integral of the piecewise-linear interpolant over [t0, t1].
double integrate(const std::vector<double>& s, double fs, double t0, double t1) {
  const auto k0 = static_cast<long>(std::ceil(t0 * fs - kIndexSlack));
  const auto k1 = static_cast<long>(std::floor(t1 * fs + kIndexSlack));
  const double v0 = sample_at(s, fs, t0);
  const double v1 = sample_at(s, fs, t1);
  if (k0 > k1) return 0.5 * (v0 + v1) * (t1 - t0);

  const double tk0 = static_cast<double>(k0) / fs;
  const double tk1 = static_cast<double>(k1) / fs;
  double sum = 0.5 * (v0 + s[k0]) * (tk0 - t0);
  for (long k = k0; k < k1; ++k) sum += 0.5 * (s[k] + s[k + 1]) / fs;
  sum += 0.5 * (s[k1] + v1) * (t1 - tk1);
  return sum;
}

enum class Kind { Peak, Valley };

struct Extremum {
  std::size_t index;
  double value;
  Kind kind;
};

std::vector<double> moving_average(std::span<const double> x, std::size_t half) {
  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size() - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double stddev(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace

double ImuStream::duration() const {
  if (gyro_z.empty()) return 0.0;
  return static_cast<double>(gyro_z.size() - 1) / sample_rate;
}

double heading_change(const ImuStream& stream, int n) {
  require(stream.sample_rate > 0.0 && stream.delta > 0.0, "heading_change: invalid stream timing");
  const double t0 = (n + 1) * stream.delta;
  const double t1 = (n + 2) * stream.delta;
  if (n < 0 || stream.gyro_z.empty() || t1 > stream.duration() + kIndexSlack) {
    throw std::out_of_range("heading_change: interval for MP " + std::to_string(n) +
                            " exceeds the gyro stream");
  }
  return integrate(stream.gyro_z, stream.sample_rate, t0, t1);
}

int quantize_heading(double theta, double threshold) {
  require(threshold > 0.0, "quantize_heading: threshold must be positive");
  return theta >= threshold ? 1 : 0;
}

std::vector<int> heading_flags(const ImuStream& stream, int mp_count, double threshold) {
  require(mp_count >= 1, "heading_flags: need at least one MP");
  std::vector<int> beta(static_cast<std::size_t>(mp_count), 0);
  for (int n = 0; n + 1 < mp_count; ++n) {
    beta[n] = quantize_heading(heading_change(stream, n), threshold);
  }
  beta.back() = 1;
  return beta;
}

std::vector<Course> segment_courses(std::span<const int> beta) {
  require(!beta.empty() && beta.back() == 1, "segment_courses: last flag must be 1");
  std::vector<Course> courses;
  int first = 0;
  for (int n = 0; n < static_cast<int>(beta.size()); ++n) {
    if (beta[n] == 1) {
      courses.push_back({first, n});
      first = n + 1;
    }
  }
  return courses;
}

std::vector<double> speed_ratios(std::span<const double> gaps) {
  require(!gaps.empty(), "speed_ratios: no courses");
  for (double g : gaps) require(g > 0.0 && std::isfinite(g), "speed_ratios: gaps must be positive");
  const double rmin = *std::min_element(gaps.begin(), gaps.end());
  std::vector<double> v;
  v.reserve(gaps.size());
  // r/rmin is exactly 1 for the slowest course, so its ratio is exactly 1.
  for (double g : gaps) v.push_back(std::pow(g / rmin, 0.25));
  return v;
}

std::optional<double> peak_valley_gap(std::span<const double> samples, double sample_rate) {
  if (samples.size() < 3) return std::nullopt;
  const double spread = stddev(samples);
  if (!(spread > kFlatSpread)) return std::nullopt;
  const double threshold = kProminenceFraction * spread;

  const auto half = static_cast<std::size_t>(
      std::max(0L, std::lround(kSmoothingWindowSeconds * sample_rate) / 2));
  const auto smooth = moving_average(samples, half);

  std::vector<Extremum> raw;
  for (std::size_t i = 1; i + 1 < smooth.size(); ++i) {
    if (smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1]) {
      raw.push_back({i, smooth[i], Kind::Peak});
    } else if (smooth[i] < smooth[i - 1] && smooth[i] <= smooth[i + 1]) {
      raw.push_back({i, smooth[i], Kind::Valley});
    }
  }

  // Zig-zag filter: consecutive kept extrema alternate and differ by at least
  // the prominence threshold.
  std::vector<Extremum> kept;
  for (const auto& e : raw) {
    if (kept.empty()) {
      kept.push_back(e);
      continue;
    }
    auto& last = kept.back();
    if (e.kind == last.kind) {
      const bool more_extreme = e.kind == Kind::Peak ? e.value > last.value : e.value < last.value;
      if (more_extreme) last = e;
    } else if (std::abs(e.value - last.value) >= threshold) {
      kept.push_back(e);
    }
  }

  // Read the amplitude off the raw samples near each smoothed extremum.
  for (auto& e : kept) {
    const std::size_t lo = e.index >= half ? e.index - half : 0;
    const std::size_t hi = std::min(samples.size() - 1, e.index + half);
    auto first = samples.begin() + static_cast<std::ptrdiff_t>(lo);
    auto last = samples.begin() + static_cast<std::ptrdiff_t>(hi) + 1;
    e.value = e.kind == Kind::Peak ? *std::max_element(first, last) : *std::min_element(first, last);
  }

  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
    if (kept[i].kind == Kind::Peak && kept[i + 1].kind == Kind::Valley) {
      sum += kept[i].value - kept[i + 1].value;
      ++pairs;
    }
  }
  if (pairs == 0) return std::nullopt;
  return sum / pairs;
}

std::span<const double> course_window(const ImuStream& stream, const Course& course) {
  const double t0 = course.first * stream.delta;
  const double t1 = (course.last + 1) * stream.delta;
  const auto size = static_cast<long>(stream.accel_norm.size());
  // Samples strictly after t0 and up to t1 inclusive.
  long k0 = static_cast<long>(std::floor(t0 * stream.sample_rate + kIndexSlack)) + 1;
  long k1 = static_cast<long>(std::floor(t1 * stream.sample_rate + kIndexSlack));
  k0 = std::clamp(k0, 0L, size);
  k1 = std::clamp(k1, -1L, size - 1);
  if (k1 < k0) return {};
  return std::span<const double>(stream.accel_norm).subspan(static_cast<std::size_t>(k0),
                                                            static_cast<std::size_t>(k1 - k0 + 1));
}

SpeedProfile speed_variation(const ImuStream& stream, std::span<const Course> courses) {
  require(!courses.empty(), "speed_variation: no courses");
  SpeedProfile out;
  std::vector<std::optional<double>> detected;
  double sum = 0.0;
  int count = 0;
  for (const auto& c : courses) {
    auto r = peak_valley_gap(course_window(stream, c), stream.sample_rate);
    if (r && *r > 0.0) {
      sum += *r;
      ++count;
    } else {
      r.reset();
    }
    detected.push_back(r);
  }
  const double fill = count > 0 ? sum / count : 1.0;
  for (const auto& r : detected) {
    out.gap.push_back(r.value_or(fill));
    out.fallback.push_back(!r.has_value());
  }
  out.ratio = speed_ratios(out.gap);
  return out;
}

int CourseSegmentation::course_of(int n) const {
  auto it = std::lower_bound(courses.begin(), courses.end(), n,
                             [](const Course& c, int idx) { return c.last < idx; });
  require(it != courses.end() && it->first <= n, "course_of: MP outside every course");
  return static_cast<int>(it - courses.begin());
}

std::vector<double> CourseSegmentation::ratio_per_mp() const {
  std::vector<double> v(beta.size(), 1.0);
  for (std::size_t l = 0; l < courses.size(); ++l) {
    for (int n = courses[l].first; n <= courses[l].last; ++n) v[n] = speed.ratio[l];
  }
  return v;
}

CourseSegmentation segment_trajectory(const ImuStream& stream, int mp_count, double threshold) {
  CourseSegmentation seg;
  seg.beta = heading_flags(stream, mp_count, threshold);
  seg.courses = segment_courses(seg.beta);
  seg.speed = speed_variation(stream, seg.courses);
  return seg;
}

}  // namespace mingle::sensing
