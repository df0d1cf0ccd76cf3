#pragma once

#include "mingle/features.hpp"
#include "mingle/metrics.hpp"
#include "mingle/sensing.hpp"
#include "mingle/simulator.hpp"

namespace mingle::baselines {

/// Per-MP LLS multilateration over all APs. An MP with degenerate geometry
/// repeats the previous estimate (the AP centroid for the first MP) and is flagged.
TrajectoryEstimate lls_rs_trajectory(const simulator::Scenario& scenario);

/// CDA pseudo-labels used directly as the estimate.
TrajectoryEstimate cda_trajectory(const simulator::Scenario& scenario, int k = 3);
TrajectoryEstimate cda_trajectory(const simulator::Scenario& scenario,
                                  const features::CdaParams& params);

/// Noise levels of the IMU-aided Kalman filter. `accel_psd` is the white
/// acceleration spectral density (m^2/s^3); `fix_variance` the per-axis
/// variance of an LLS fix (m^2). Defaults come from tune_ekf on type3
/// seeds 101..105.
struct EkfParams {
  double accel_psd = 0.01;
  double fix_variance = 30.0;
  double initial_speed_variance = 4.0;
};

/// State of the filter after the last processed MP.
struct EkfState {
  Eigen::Vector4d state = Eigen::Vector4d::Zero();  // x, y, vx, vy
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
};

/// Constant-velocity filter on (x, y, vx, vy). Each prediction rotates the
/// velocity by the gyro heading change and rescales it by the ratio of
/// course speed factors; each update fuses the LLS fix. The measurement is
/// linear, so the extended filter reduces to a plain Kalman filter.
class ImuAidedKalman {
public:
  explicit ImuAidedKalman(EkfParams params) : params_(params) {}

  void initialize(const Vec2& fix);
  void predict(double dt, double heading_change, double speed_scale);
  void update(const Vec2& fix);

  const EkfState& state() const { return state_; }
  Vec2 position() const { return state_.state.head<2>(); }

private:
  EkfParams params_;
  EkfState state_;
};

/// True when the matrix is symmetric and its smallest eigenvalue is >= -tol.
bool is_symmetric_psd(const Eigen::Matrix4d& m, double tol = 1e-9);

TrajectoryEstimate ekf_trajectory(const simulator::Scenario& scenario,
                                  const EkfParams& params = {});

/// Coarse grid search over (accel_psd, fix_variance) minimising the mean
/// RMSE over the given scenarios.
EkfParams tune_ekf(std::span<const simulator::Scenario> scenarios);

}  // namespace mingle::baselines
