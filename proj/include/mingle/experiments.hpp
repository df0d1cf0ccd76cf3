#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mingle/features.hpp"
#include "mingle/graphs.hpp"
#include "mingle/metrics.hpp"
#include "mingle/sensing.hpp"
#include "mingle/simulator.hpp"
#include "mingle/training.hpp"

namespace mingle::experiments {

/// Self: no ground truth reaches the learner. Semi: the scenario's alpha is
/// used, or the sensed turn flags when the scenario carries no labels.
enum class Mode { Self, Semi };

struct PipelineConfig {
  training::TrainConfig train;
  Mode mode = Mode::Self;
  int k = 3;
  std::optional<features::CdaParams> cda;  // defaults from the combo count when empty
  double heading_threshold = sensing::kDefaultHeadingThreshold;
  // The network has no bias terms, so its output frame matters. When set,
  // it regresses positions relative to the AP centroid.
  bool center_outputs = true;
};

/// Everything computed ahead of training.
struct Pipeline {
  sensing::CourseSegmentation segmentation;
  features::FeatureSet features;
  features::CdaLabels labels;
  graphs::MobilityGraphs graphs;
  training::LossTargets targets;  // positions relative to `origin`
  Vec2 origin = Vec2::Zero();
};

Pipeline prepare_pipeline(const simulator::Scenario& scenario, const PipelineConfig& config);

/// FNV-1a over the settings that influence a MINGLE estimate.
std::string config_hash(const PipelineConfig& config);

struct MingleRun {
  TrajectoryEstimate estimate;   // b, the reported estimate
  Trajectory aux;                // a, for cross-graph routings
  training::TrainResult result;  // per-repetition outputs in the site frame
};

MingleRun run_mingle(const simulator::Scenario& scenario, const PipelineConfig& config);
MingleRun run_mingle(const Pipeline& pipeline, const PipelineConfig& config);

/// Variance of the speed-normalized steps of a trajectory, over all MPs.
double step_variance(const Trajectory& estimate, const training::LossTargets& targets);

struct AblationRow {
  gcn::Routing routing;
  EvalReport report;
};

/// Trains every routing of gcn::all_routings() on the same preprocessing.
std::vector<AblationRow> run_ablation(const simulator::Scenario& scenario,
                                      const PipelineConfig& config);
/// routing,mae,rmse,p50,p75,p95
std::string ablation_to_csv(std::span<const AblationRow> rows);

struct SweepRow {
  double lambda = 0.0;
  EvalReport report;
  double gamma_variance = 0.0;
};

std::vector<SweepRow> run_lambda_sweep(const simulator::Scenario& scenario,
                                       const PipelineConfig& config,
                                       std::span<const double> lambdas);
/// lambda,mae,rmse,var_gamma
std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace mingle::experiments
