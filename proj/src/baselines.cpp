#include "mingle/baselines.hpp"

#include <cmath>
#include <limits>

#include "mingle/errors.hpp"
#include "mingle/geometry.hpp"

namespace mingle::baselines {

namespace {

std::vector<Vec2> fixes_with_fallback(const simulator::Scenario& sc, std::vector<bool>& flagged) {
  const int n_mp = sc.mp_count();
  Vec2 centroid = Vec2::Zero();
  for (const auto& z : sc.aps) centroid += z;
  centroid /= static_cast<double>(sc.aps.size());

  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(n_mp));
  flagged.assign(static_cast<std::size_t>(n_mp), false);
  std::vector<double> ranges(sc.aps.size());
  for (int n = 0; n < n_mp; ++n) {
    for (int m = 0; m < sc.ap_count(); ++m) ranges[m] = geometry::rtt_to_range(sc.rtt(n, m));
    try {
      out.push_back(geometry::lls_multilaterate(sc.aps, ranges));
    } catch (const DegenerateGeometry&) {
      out.push_back(out.empty() ? centroid : out.back());
      flagged[n] = true;
    }
  }
  return out;
}

}  // namespace

TrajectoryEstimate lls_rs_trajectory(const simulator::Scenario& scenario) {
  TrajectoryEstimate est;
  est.method = "lls";
  est.coords = fixes_with_fallback(scenario, est.flagged);
  return est;
}

TrajectoryEstimate cda_trajectory(const simulator::Scenario& scenario,
                                  const features::CdaParams& params) {
  const auto fs = features::build_features(scenario.rtt, scenario.aps, params.k);
  const auto labels = features::cda_label(fs, scenario.rtt, scenario.aps, params.q1, params.q2);
  TrajectoryEstimate est;
  est.method = "cda";
  est.coords = labels.c;
  est.flagged.assign(est.coords.size(), false);
  return est;
}

TrajectoryEstimate cda_trajectory(const simulator::Scenario& scenario, int k) {
  const auto combos = features::enumerate_combos(scenario.ap_count(), k);
  return cda_trajectory(scenario,
                        features::default_cda_params(static_cast<int>(combos.size()), k));
}

void ImuAidedKalman::initialize(const Vec2& fix) {
  state_.state << fix.x(), fix.y(), 0.0, 0.0;
  state_.covariance.setZero();
  state_.covariance(0, 0) = state_.covariance(1, 1) = params_.fix_variance;
  state_.covariance(2, 2) = state_.covariance(3, 3) = params_.initial_speed_variance;
}

void ImuAidedKalman::predict(double dt, double heading_change, double speed_scale) {
  const Eigen::Matrix2d rot = Eigen::Rotation2Dd(heading_change).toRotationMatrix() * speed_scale;
  Eigen::Matrix4d f = Eigen::Matrix4d::Zero();
  f.topLeftCorner<2, 2>().setIdentity();
  f.topRightCorner<2, 2>() = dt * rot;
  f.bottomRightCorner<2, 2>() = rot;

  const double q = params_.accel_psd;
  Eigen::Matrix4d qm = Eigen::Matrix4d::Zero();
  qm.topLeftCorner<2, 2>().diagonal().setConstant(q * dt * dt * dt / 3.0);
  qm.topRightCorner<2, 2>().diagonal().setConstant(q * dt * dt / 2.0);
  qm.bottomLeftCorner<2, 2>().diagonal().setConstant(q * dt * dt / 2.0);
  qm.bottomRightCorner<2, 2>().diagonal().setConstant(q * dt);

  state_.state = f * state_.state;
  state_.covariance = f * state_.covariance * f.transpose() + qm;
  state_.covariance = 0.5 * (state_.covariance + state_.covariance.transpose()).eval();
}

void ImuAidedKalman::update(const Vec2& fix) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h.leftCols<2>().setIdentity();
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * params_.fix_variance;
  const Eigen::Matrix4d& p = state_.covariance;

  const Eigen::Matrix2d s = h * p * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> k = p * h.transpose() * s.inverse();
  state_.state += k * (fix - h * state_.state);

  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - k * h;
  Eigen::Matrix4d updated = ikh * p;
  updated = 0.5 * (updated + updated.transpose()).eval();
  if (!is_symmetric_psd(updated)) {
    // Joseph form keeps the covariance PSD under round-off.
    updated = ikh * p * ikh.transpose() + k * r * k.transpose();
    updated = 0.5 * (updated + updated.transpose()).eval();
  }
  state_.covariance = updated;
}

bool is_symmetric_psd(const Eigen::Matrix4d& m, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

TrajectoryEstimate ekf_trajectory(const simulator::Scenario& scenario, const EkfParams& params) {
  const int n_mp = scenario.mp_count();
  require(!scenario.imu.gyro_z.empty(), "ekf_trajectory: IMU stream required");

  TrajectoryEstimate est;
  est.method = "ekf";
  const auto fixes = fixes_with_fallback(scenario, est.flagged);
  const auto seg = sensing::segment_trajectory(scenario.imu, n_mp);
  const auto ratio = seg.ratio_per_mp();

  ImuAidedKalman kf(params);
  kf.initialize(fixes[0]);
  est.coords.push_back(kf.position());
  for (int n = 1; n < n_mp; ++n) {
    kf.predict(scenario.imu.delta, sensing::heading_change(scenario.imu, n - 1),
               ratio[n] / ratio[n - 1]);
    if (!est.flagged[n]) kf.update(fixes[n]);
    if (!is_symmetric_psd(kf.state().covariance, 1e-6)) {
      throw NumericalFailure("ekf_trajectory: covariance lost positive semi-definiteness");
    }
    est.coords.push_back(kf.position());
  }
  return est;
}

EkfParams tune_ekf(std::span<const simulator::Scenario> scenarios) {
  require(!scenarios.empty(), "tune_ekf: need at least one scenario");
  const double accel_grid[] = {0.01, 0.03, 0.1, 0.3, 1.0, 3.0};
  const double fix_grid[] = {0.3, 1.0, 3.0, 10.0, 30.0, 100.0};
  EkfParams best;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (double q : accel_grid) {
    for (double r : fix_grid) {
      EkfParams p;
      p.accel_psd = q;
      p.fix_variance = r;
      double sum = 0.0;
      for (const auto& sc : scenarios) sum += evaluate(ekf_trajectory(sc, p), sc.truth).rmse;
      if (sum < best_rmse) {
        best_rmse = sum;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace mingle::baselines
