#include "mingle/experiments.hpp"

#include <algorithm>
#include <cstdio>

#include "mingle/errors.hpp"

namespace mingle::experiments {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Matrix to_matrix(const Trajectory& t) {
  Matrix m(static_cast<int>(t.size()), 2);
  for (std::size_t i = 0; i < t.size(); ++i) m.row(static_cast<int>(i)) = t[i].transpose();
  return m;
}

std::vector<int> supervision_mask(const simulator::Scenario& sc, const PipelineConfig& config,
                                  const std::vector<int>& beta) {
  const auto n = static_cast<std::size_t>(sc.mp_count());
  if (config.mode == Mode::Self) return std::vector<int>(n, 0);
  const bool any = std::any_of(sc.alpha.begin(), sc.alpha.end(), [](int a) { return a == 1; });
  std::vector<int> alpha = any ? sc.alpha : beta;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 1) require(sc.truth[i].allFinite(), "semi-supervised MP without ground truth");
  }
  return alpha;
}

Trajectory shifted(Trajectory t, const Vec2& by) {
  for (auto& x : t) x += by;
  return t;
}

}  // namespace

Pipeline prepare_pipeline(const simulator::Scenario& sc, const PipelineConfig& config) {
  config.train.validate();
  const int n_mp = sc.mp_count();
  require(n_mp >= 3, "pipeline: need at least 3 MPs");

  Pipeline p;
  p.segmentation = sensing::segment_trajectory(sc.imu, n_mp, config.heading_threshold);
  p.features = features::build_features(sc.rtt, sc.aps, config.k);
  const auto cda = config.cda.value_or(features::default_cda_params(p.features.combo_count(), config.k));
  p.labels = features::cda_label(p.features, sc.rtt, sc.aps, cda.q1, cda.q2);
  p.graphs = graphs::build_graphs(n_mp, config.train.epsilon, p.segmentation.courses);

  if (config.center_outputs) {
    for (const auto& z : sc.aps) p.origin += z;
    p.origin /= static_cast<double>(sc.aps.size());
  }

  auto& t = p.targets;
  t.truth = shifted(sc.truth, -p.origin);
  t.alpha = supervision_mask(sc, config, p.segmentation.beta);
  t.cda = shifted(p.labels.c, -p.origin);
  t.step_scale = p.segmentation.ratio_per_mp();
  t.course_start.assign(static_cast<std::size_t>(n_mp), false);
  for (std::size_t l = 1; l < p.segmentation.courses.size(); ++l) {
    t.course_start[p.segmentation.courses[l].first] = true;
  }
  return p;
}

std::string config_hash(const PipelineConfig& c) {
  const auto& t = c.train;
  std::string s = "mode=" + std::string(c.mode == Mode::Self ? "self" : "semi") +
                  ";k=" + std::to_string(c.k) + ";delta=" + num(c.heading_threshold);
  if (c.cda) s += ";q1=" + std::to_string(c.cda->q1) + ";q2=" + std::to_string(c.cda->q2);
  s += ";epochs=" + std::to_string(t.max_epochs) + ";patience=" + std::to_string(t.patience) +
       ";reps=" + std::to_string(t.repetitions) + ";val=" + num(t.val_fraction) +
       ";lr=" + num(t.learning_rate) + ";lambda=" + num(t.lambda) +
       ";eps=" + std::to_string(t.epsilon) + ";h1=" + std::to_string(t.hidden) +
       ";seed=" + std::to_string(t.seed) + ";resplit=" + std::to_string(t.resplit_per_repetition) +
       ";routing=" + t.routing.name() + ";center=" + std::to_string(c.center_outputs);
  return fnv1a_hex(s);
}

MingleRun run_mingle(const Pipeline& p, const PipelineConfig& config) {
  const auto inputs = gcn::prepare_inputs(p.graphs, p.features, config.train.routing);
  MingleRun run;
  run.result = training::train(config.train, inputs, p.targets, p.features.ap_count(),
                               p.features.combo_count());
  auto& r = run.result;
  r.estimate = shifted(std::move(r.estimate), p.origin);
  r.aux_estimate = shifted(std::move(r.aux_estimate), p.origin);
  for (auto& rep : r.runs) {
    rep.b = shifted(std::move(rep.b), p.origin);
    rep.a = shifted(std::move(rep.a), p.origin);
  }
  run.estimate.coords = r.estimate;
  run.aux = r.aux_estimate;
  run.estimate.method = "mingle";
  run.estimate.seed = config.train.seed;
  run.estimate.config_hash = config_hash(config);
  run.estimate.flagged.assign(run.estimate.coords.size(), false);
  return run;
}

MingleRun run_mingle(const simulator::Scenario& scenario, const PipelineConfig& config) {
  return run_mingle(prepare_pipeline(scenario, config), config);
}

double step_variance(const Trajectory& estimate, const training::LossTargets& targets) {
  return training::variance(training::speed_normalized_steps(to_matrix(estimate), targets));
}

std::vector<AblationRow> run_ablation(const simulator::Scenario& scenario,
                                      const PipelineConfig& config) {
  const auto pipeline = prepare_pipeline(scenario, config);
  std::vector<AblationRow> rows;
  for (const auto& routing : gcn::all_routings()) {
    auto c = config;
    c.train.routing = routing;
    const auto run = run_mingle(pipeline, c);
    rows.push_back({routing, evaluate(run.estimate, scenario.truth)});
  }
  return rows;
}

std::string ablation_to_csv(std::span<const AblationRow> rows) {
  std::string out = "routing,mae,rmse,p50,p75,p95\n";
  for (const auto& r : rows) {
    out += r.routing.name() + "," + num(r.report.mae) + "," + num(r.report.rmse) + "," +
           num(r.report.p50) + "," + num(r.report.p75) + "," + num(r.report.p95) + "\n";
  }
  return out;
}

std::vector<SweepRow> run_lambda_sweep(const simulator::Scenario& scenario,
                                       const PipelineConfig& config,
                                       std::span<const double> lambdas) {
  require(!lambdas.empty(), "sweep: no lambda values");
  for (double l : lambdas) require(l >= 0.0, "sweep: lambda must be non-negative");
  const auto pipeline = prepare_pipeline(scenario, config);
  std::vector<SweepRow> rows;
  for (double l : lambdas) {
    auto c = config;
    c.train.lambda = l;
    const auto run = run_mingle(pipeline, c);
    rows.push_back({l, evaluate(run.estimate, scenario.truth),
                    step_variance(run.estimate.coords, pipeline.targets)});
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = "lambda,mae,rmse,var_gamma\n";
  for (const auto& r : rows) {
    out += num(r.lambda) + "," + num(r.report.mae) + "," + num(r.report.rmse) + "," +
           num(r.gamma_variance) + "\n";
  }
  return out;
}

}  // namespace mingle::experiments
