#pragma once

#include <string>
#include <string_view>

#include "mingle/features.hpp"
#include "mingle/metrics.hpp"
#include "mingle/simulator.hpp"
#include "mingle/training.hpp"

namespace mingle::io {

/// Scenario document:
///   {delta_s, sample_rate, aps: [[x,y]...], gt: [[x,y] | null ...],
///    rtt_s: [[tau...]...], gyro_z: [...], accel_norm: [...], alpha: [0|1...]}
/// Unknown ground truth is held as NaN in Scenario::truth.
std::string scenario_to_json(const simulator::Scenario& scenario);
simulator::Scenario scenario_from_json(std::string_view text);
void write_scenario(const simulator::Scenario& scenario, const std::string& path);
simulator::Scenario read_scenario(const std::string& path);

/// `n,x,y` with a header row and 1-based MP numbers.
std::string estimate_to_csv(const TrajectoryEstimate& estimate);
Trajectory estimate_from_csv(std::string_view text);
void write_estimate(const TrajectoryEstimate& estimate, const std::string& path);
Trajectory read_estimate(const std::string& path);

std::string report_to_json(const EvalReport& report);
/// Header `error`, then one sorted error per line.
std::string cdf_to_csv(const EvalReport& report);

/// {"K", "Q1", "Q2", "labels": [[x,y]...]}
std::string labels_to_json(const features::CdaLabels& labels);

/// epoch,train_total,val_total,mse1,mse2,mr
std::string loss_log_to_csv(const std::vector<training::EpochLog>& log);

std::string matrix_to_csv(const Matrix& m);

/// Estimated vs. true trajectory with AP markers, axes in meters.
std::string trajectory_svg(const Trajectory& truth, const Trajectory& estimate,
                           const std::vector<Vec2>& aps);

std::string read_text(const std::string& path);
void write_text(const std::string& path, std::string_view text);

}  // namespace mingle::io
