#include "mingle/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mingle/errors.hpp"
#include "mingle/geometry.hpp"

namespace mingle::features {

namespace {

constexpr double kSumGuard = 1e-6;

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

void check_rtt(const Matrix& rtt, std::size_t ap_count) {
  require(rtt.rows() >= 1, "features: no measurement points");
  require(static_cast<std::size_t>(rtt.cols()) == ap_count, "features: RTT width != AP count");
  require((rtt.array() > 0.0).all() && rtt.allFinite(), "features: RTTs must be positive");
}

}  // namespace

std::vector<Combo> enumerate_combos(int m, int k) {
  require(k >= 3, "enumerate_combos: K must be at least 3");
  require(k <= m, "enumerate_combos: K must not exceed M");
  std::vector<Combo> out;
  Combo c(static_cast<std::size_t>(k));
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == m - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

Matrix build_f1(const Matrix& rtt) {
  require((rtt.array() > 0.0).all(), "build_f1: RTTs must be positive");
  const Vector sums = rtt.rowwise().sum();
  return sums.cwiseInverse().asDiagonal() * rtt;
}

Vec2 frame_shift_for(std::span<const Vec2> aps) {
  Vec2 shift = Vec2::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    double lo = aps.front()[axis];
    for (const auto& z : aps) lo = std::min(lo, z[axis]);
    shift[axis] = std::max(0.0, 1.0 - lo);
  }
  return shift;
}

Vec2 coordinate_median(std::span<const Vec2> points) {
  require(!points.empty(), "coordinate_median: empty set");
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (const auto& p : points) {
    xs.push_back(p.x());
    ys.push_back(p.y());
  }
  return {median_of(std::move(xs)), median_of(std::move(ys))};
}

FeatureSet build_features(const Matrix& rtt, std::span<const Vec2> aps, int k) {
  check_rtt(rtt, aps.size());
  FeatureSet fs;
  fs.combos = enumerate_combos(static_cast<int>(aps.size()), k);
  fs.f1 = build_f1(rtt);
  fs.frame_shift = frame_shift_for(aps);

  const int n_mp = static_cast<int>(rtt.rows());
  const int q_count = static_cast<int>(fs.combos.size());
  fs.pels.resize(n_mp, 2 * q_count);
  fs.pel_valid.resize(n_mp, q_count);
  fs.f2.resize(n_mp, 2 * q_count);
  fs.abs_normalized.assign(static_cast<std::size_t>(n_mp), false);

  std::vector<Vec2> sub_aps(static_cast<std::size_t>(k));
  std::vector<double> sub_ranges(static_cast<std::size_t>(k));
  for (int n = 0; n < n_mp; ++n) {
    std::vector<Vec2> ok;
    for (int q = 0; q < q_count; ++q) {
      const auto& combo = fs.combos[q];
      for (int j = 0; j < k; ++j) {
        sub_aps[j] = aps[combo[j]];
        sub_ranges[j] = geometry::rtt_to_range(rtt(n, combo[j]));
      }
      try {
        const Vec2 y = geometry::lls_multilaterate(sub_aps, sub_ranges);
        fs.pels(n, 2 * q) = y.x();
        fs.pels(n, 2 * q + 1) = y.y();
        fs.pel_valid(n, q) = true;
        ok.push_back(y);
      } catch (const DegenerateGeometry&) {
        fs.pel_valid(n, q) = false;
      }
    }
    if (ok.empty()) {
      throw NumericalFailure("build_features: every AP combination is degenerate at MP " +
                             std::to_string(n));
    }
    if (static_cast<int>(ok.size()) < q_count) {
      const Vec2 fill = coordinate_median(ok);
      for (int q = 0; q < q_count; ++q) {
        if (fs.pel_valid(n, q)) continue;
        fs.pels(n, 2 * q) = fill.x();
        fs.pels(n, 2 * q + 1) = fill.y();
      }
    }

    for (int q = 0; q < q_count; ++q) {
      fs.f2(n, 2 * q) = fs.pels(n, 2 * q) + fs.frame_shift.x();
      fs.f2(n, 2 * q + 1) = fs.pels(n, 2 * q + 1) + fs.frame_shift.y();
    }
    double denom = fs.f2.row(n).sum();
    if (std::abs(denom) < kSumGuard) {
      denom = fs.f2.row(n).cwiseAbs().sum();
      fs.abs_normalized[n] = true;
    }
    fs.f2.row(n) /= denom;
  }
  return fs;
}

CdaParams default_cda_params(int q, int k) {
  if (q == 120) return {k, 37, 12};
  CdaParams p{k, static_cast<int>(std::ceil(0.31 * q)), static_cast<int>(std::ceil(0.10 * q))};
  p.q1 = std::clamp(p.q1, 1, q);
  p.q2 = std::clamp(p.q2, 1, p.q1);
  return p;
}

CdaSelection cda_select(const FeatureSet& fs, int n, const Matrix& rtt,
                        std::span<const Vec2> aps, int q1, int q2) {
  const int q_count = fs.combo_count();
  require(1 <= q2 && q2 <= q1 && q1 <= q_count, "cda_select: need 1 <= Q2 <= Q1 <= Q");

  std::vector<double> residual(static_cast<std::size_t>(q_count));
  std::vector<double> rtt_sum(static_cast<std::size_t>(q_count));
  for (int q = 0; q < q_count; ++q) {
    const Vec2 y = fs.pel(n, q);
    double u = 0.0, v = 0.0;
    for (int m : fs.combos[q]) {
      u += std::abs((aps[m] - y).norm() - geometry::rtt_to_range(rtt(n, m)));
      v += rtt(n, m);
    }
    residual[q] = fs.pel_valid(n, q) ? u : std::numeric_limits<double>::infinity();
    rtt_sum[q] = v;
  }

  CdaSelection sel;
  std::vector<int> order(static_cast<std::size_t>(q_count));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return residual[a] < residual[b]; });
  sel.stage1.assign(order.begin(), order.begin() + q1);

  std::vector<int> stage = sel.stage1;
  std::sort(stage.begin(), stage.end());
  std::stable_sort(stage.begin(), stage.end(),
                   [&](int a, int b) { return rtt_sum[a] < rtt_sum[b]; });
  sel.stage2.assign(stage.begin(), stage.begin() + q2);

  std::vector<Vec2> chosen;
  chosen.reserve(sel.stage2.size());
  for (int q : sel.stage2) chosen.push_back(fs.pel(n, q));
  sel.label = coordinate_median(chosen);
  return sel;
}

CdaLabels cda_label(const FeatureSet& fs, const Matrix& rtt, std::span<const Vec2> aps,
                    int q1, int q2) {
  check_rtt(rtt, aps.size());
  require(rtt.rows() == fs.f1.rows(), "cda_label: RTT rows != feature rows");
  CdaLabels out;
  const int k = fs.combos.empty() ? 0 : static_cast<int>(fs.combos.front().size());
  out.params = {k, q1, q2};
  out.c.reserve(static_cast<std::size_t>(rtt.rows()));
  for (int n = 0; n < rtt.rows(); ++n) out.c.push_back(cda_select(fs, n, rtt, aps, q1, q2).label);
  return out;
}

}  // namespace mingle::features
