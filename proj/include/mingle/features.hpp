#pragma once

#include <span>
#include <vector>

#include "mingle/types.hpp"

namespace mingle::features {

using Combo = std::vector<int>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// All K-subsets of {0..M-1} in lexicographic order.
std::vector<Combo> enumerate_combos(int m, int k);

/// Row-normalized RTTs: row n is tau_n / sum(tau_n).
Matrix build_f1(const Matrix& rtt);

/// Per-axis translation that puts every AP coordinate at >= 1 m. Axes that
/// already satisfy this are left alone.
Vec2 frame_shift_for(std::span<const Vec2> aps);

/// Per-coordinate median; even counts average the two middle values.
Vec2 coordinate_median(std::span<const Vec2> points);

struct FeatureSet {
  Matrix f1;                   // N x M
  Matrix f2;                   // N x 2Q
  Matrix pels;                 // N x 2Q, (x, y) per combo, site frame
  Mask pel_valid;              // N x Q, false where multilateration failed
  std::vector<Combo> combos;   // Q entries
  Vec2 frame_shift = Vec2::Zero();
  std::vector<bool> abs_normalized;  // rows that fell back to sum of |entries|

  int mp_count() const { return static_cast<int>(f1.rows()); }
  int ap_count() const { return static_cast<int>(f1.cols()); }
  int combo_count() const { return static_cast<int>(combos.size()); }
  Vec2 pel(int n, int q) const { return {pels(n, 2 * q), pels(n, 2 * q + 1)}; }
};

/// Builds F1, every preliminary estimated location (PEL) and F2.
///
/// PELs are LLS multilateration fixes from each K-subset of APs. A subset
/// whose geometry is degenerate gets the per-coordinate median of that MP's
/// successful PELs. F2 rows are computed in a frame shifted by
/// frame_shift_for(aps) and divided by their coordinate sum (by the sum of
/// absolute values if that sum is below 1e-6). Throws NumericalFailure if
/// every subset fails at some MP.
FeatureSet build_features(const Matrix& rtt, std::span<const Vec2> aps, int k);

struct CdaParams {
  int k = 3;
  int q1 = 1;
  int q2 = 1;
};

/// (3, 37, 12) for Q = 120, otherwise ceil(0.31 Q) and ceil(0.10 Q).
CdaParams default_cda_params(int q, int k = 3);

struct CdaSelection {
  std::vector<int> stage1;  // Q1 combos with the lowest residual sum u
  std::vector<int> stage2;  // Q2 of those with the lowest RTT sum
  Vec2 label = Vec2::Zero();
};

/// Combinatorial filtering for one MP. Ties are broken by combo index.
/// Failed combos sort after every valid one.
CdaSelection cda_select(const FeatureSet& fs, int n, const Matrix& rtt,
                        std::span<const Vec2> aps, int q1, int q2);

struct CdaLabels {
  Trajectory c;
  CdaParams params;
};

CdaLabels cda_label(const FeatureSet& fs, const Matrix& rtt, std::span<const Vec2> aps,
                    int q1, int q2);

}  // namespace mingle::features
