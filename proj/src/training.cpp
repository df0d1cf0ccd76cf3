#include "mingle/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mingle/errors.hpp"
#include "mingle/features.hpp"

namespace mingle::training {

namespace {

bool is_active(const std::vector<bool>& active, int n) { return active.empty() || active[n]; }

void check_targets(const LossTargets& t, int n_out) {
  const auto n = static_cast<std::size_t>(t.mp_count());
  require(static_cast<int>(n) == n_out, "loss: output rows != MP count");
  require(n >= 3, "loss: the mobility regularizer needs at least 3 MPs");
  require(t.truth.size() == n && t.cda.size() == n && t.step_scale.size() == n,
          "loss: target vectors must have one entry per MP");
  require(t.course_start.empty() || t.course_start.size() == n,
          "loss: course_start must be empty or have one entry per MP");
}

bool step_counts(const LossTargets& t, const std::vector<bool>& active, int n) {
  if (!is_active(active, n)) return false;
  if (!t.include_boundary_steps && !t.course_start.empty() && t.course_start[n]) return false;
  return true;
}

// Loss plus its gradient with respect to the outputs a and b (N x 2 each).
LossBreakdown loss_with_output_grad(const gcn::ModelOutput& out, const LossTargets& t,
                                    double lambda, const std::vector<bool>& active, Matrix* da,
                                    Matrix* db) {
  const Matrix& b = out.b();
  const int n_mp = static_cast<int>(b.rows());
  check_targets(t, n_mp);
  require(lambda >= 0.0, "loss: lambda must be non-negative");

  const double w_mse = 0.5 / (1.0 + lambda);
  const double w_mr = lambda / (1.0 + lambda);
  if (db) db->setZero(n_mp, 2);
  if (da && out.has_a()) da->setZero(n_mp, 2);

  LossBreakdown lb;
  lb.lambda = lambda;
  for (int n = 0; n < n_mp; ++n) {
    if (!is_active(active, n)) continue;
    const bool labeled = t.alpha[n] == 1;
    const Vec2& target = labeled ? t.truth[n] : t.cda[n];
    double& bucket = labeled ? lb.mse1 : lb.mse2;
    const Vec2 eb = b.row(n).transpose() - target;
    bucket += eb.squaredNorm();
    if (db) db->row(n) += 2.0 * w_mse * eb.transpose();
    if (out.has_a()) {
      const Vec2 ea = out.a().row(n).transpose() - target;
      bucket += ea.squaredNorm();
      if (da) da->row(n) += 2.0 * w_mse * ea.transpose();
    }
  }

  std::vector<int> idx;
  std::vector<double> gamma;
  for (int n = 1; n < n_mp; ++n) {
    if (!step_counts(t, active, n)) continue;
    idx.push_back(n);
    gamma.push_back((b.row(n) - b.row(n - 1)).norm() / t.step_scale[n]);
  }
  lb.mr = variance(gamma);

  if (db && !gamma.empty() && w_mr > 0.0) {
    const double k = static_cast<double>(gamma.size());
    const double mean = std::accumulate(gamma.begin(), gamma.end(), 0.0) / k;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      const int n = idx[i];
      const Eigen::RowVector2d diff = b.row(n) - b.row(n - 1);
      const double dist = diff.norm();
      if (dist == 0.0) continue;
      const double coeff = w_mr * 2.0 * (gamma[i] - mean) / k / (dist * t.step_scale[n]);
      db->row(n) += coeff * diff;
      db->row(n - 1) -= coeff * diff;
    }
  }

  lb.total = combine(lb.mse1, lb.mse2, lb.mr, lambda);
  return lb;
}

void backprop_branch(const gcn::GcnParams& p, const gcn::PreparedBranch& pb,
                     const gcn::BranchTrace& trace, const Matrix& dout, gcn::GcnParams& g) {
  g.w2.noalias() += trace.pooled.transpose() * dout;
  const Matrix dpooled = dout * p.w2.transpose();
  // Normalized adjacency is symmetric.
  Matrix dz = pb.adjacency * dpooled;
  dz = (trace.hidden.array() > 0.0).select(dz, 0.0);
  if (pb.branch.input == gcn::Input::F1) {
    const Matrix gf = pb.propagated.transpose() * dz;  // M x h1
    g.w1.noalias() += p.lift.transpose() * gf;
    g.lift.noalias() += gf * p.w1.transpose();
  } else {
    g.w1.noalias() += pb.propagated.transpose() * dz;
  }
}

gcn::GcnParams backprop(const gcn::GcnParams& p, const gcn::PreparedInputs& in,
                        const gcn::ModelOutput& out, const Matrix& da, const Matrix& db) {
  auto g = gcn::GcnParams::zeros_like(p);
  backprop_branch(p, in.primary, out.primary, db, g);
  if (in.aux) backprop_branch(p, *in.aux, *out.aux, da, g);
  return g;
}

struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int t = 0;
  gcn::GcnParams m, v;

  Adam(double learning_rate, const gcn::GcnParams& shape)
      : lr(learning_rate), m(gcn::GcnParams::zeros_like(shape)), v(gcn::GcnParams::zeros_like(shape)) {}

  void update(Matrix& w, Matrix& mm, Matrix& vv, const Matrix& g, double c1, double c2) const {
    mm = beta1 * mm + (1.0 - beta1) * g;
    vv = beta2 * vv + (1.0 - beta2) * g.cwiseAbs2();
    w.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
  }

  void step(gcn::GcnParams& p, const gcn::GcnParams& g) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    update(p.lift, m.lift, v.lift, g.lift, c1, c2);
    update(p.w1, m.w1, v.w1, g.w1, c1, c2);
    update(p.w2, m.w2, v.w2, g.w2, c1, c2);
  }
};

Trajectory rows_to_trajectory(const Matrix& m) {
  Trajectory t;
  t.reserve(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) t.emplace_back(m(i, 0), m(i, 1));
  return t;
}

std::vector<bool> mask_of(int n, const std::vector<int>& members) {
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (int i : members) mask[i] = true;
  return mask;
}

}  // namespace

double combine(double mse1, double mse2, double mr, double lambda) {
  return (0.5 * mse1 + 0.5 * mse2) / (1.0 + lambda) + lambda * mr / (1.0 + lambda);
}

double variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double k = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / k;
}

std::vector<double> speed_normalized_steps(const Matrix& b, const LossTargets& targets,
                                           const std::vector<bool>& active) {
  std::vector<double> gamma;
  for (int n = 1; n < b.rows(); ++n) {
    if (!step_counts(targets, active, n)) continue;
    gamma.push_back((b.row(n) - b.row(n - 1)).norm() / targets.step_scale[n]);
  }
  return gamma;
}

LossBreakdown loss(const gcn::ModelOutput& output, const LossTargets& targets, double lambda,
                   const std::vector<bool>& active) {
  return loss_with_output_grad(output, targets, lambda, active, nullptr, nullptr);
}

LossAndGradient gradients(const gcn::GcnParams& params, const gcn::PreparedInputs& inputs,
                          const LossTargets& targets, double lambda,
                          const std::vector<bool>& active) {
  const auto out = gcn::forward(params, inputs);
  Matrix da, db;
  LossAndGradient r;
  r.loss = loss_with_output_grad(out, targets, lambda, active, &da, &db);
  r.grad = backprop(params, inputs, out, da, db);
  return r;
}

void TrainConfig::validate() const {
  require(max_epochs >= 1, "train: max_epochs must be positive");
  require(patience >= 1 && patience <= max_epochs, "train: need 1 <= patience <= max_epochs");
  require(repetitions >= 1, "train: repetitions must be positive");
  require(val_fraction > 0.0 && val_fraction < 1.0, "train: val_fraction must be in (0, 1)");
  require(learning_rate > 0.0, "train: learning rate must be positive");
  require(lambda >= 0.0, "train: lambda must be non-negative");
  require(epsilon >= 0, "train: epsilon must be non-negative");
  require(hidden >= 1, "train: hidden width must be positive");
}

NodeSplit split_nodes(int n, double val_fraction, std::uint64_t seed, std::span<const int> alpha) {
  require(n >= 1, "split_nodes: need at least one MP");
  require(val_fraction > 0.0 && val_fraction < 1.0, "split_nodes: fraction must be in (0, 1)");
  require(alpha.empty() || static_cast<int>(alpha.size()) == n, "split_nodes: alpha size != N");

  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    if (alpha.empty() || alpha[i] == 0) candidates.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const auto want = static_cast<std::size_t>(std::floor(val_fraction * n));
  const std::size_t take = std::min(want, candidates.size());

  std::vector<bool> in_val(static_cast<std::size_t>(n), false);
  for (std::size_t i = 0; i < take; ++i) in_val[candidates[i]] = true;
  NodeSplit split;
  for (int i = 0; i < n; ++i) (in_val[i] ? split.val : split.train).push_back(i);
  return split;
}

RepetitionResult train_once(const TrainConfig& config, const gcn::PreparedInputs& inputs,
                            const LossTargets& targets, int ap_count, int combo_count,
                            std::uint64_t seed, const NodeSplit& split) {
  const int n_mp = inputs.mp_count();
  const auto train_mask = mask_of(n_mp, split.train);
  const auto val_mask = mask_of(n_mp, split.val);
  const bool has_val = !split.val.empty();

  auto params = gcn::init_params(ap_count, combo_count, config.hidden, seed);
  auto best = params;
  Adam adam(config.learning_rate, params);

  RepetitionResult rep;
  rep.best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  Matrix da, db;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto out = gcn::forward(params, inputs);
    const auto train_loss =
        loss_with_output_grad(out, targets, config.lambda, train_mask, &da, &db);
    if (!std::isfinite(train_loss.total)) {
      rep.diverged = true;
      break;
    }
    const auto val_loss = has_val ? loss(out, targets, config.lambda, val_mask) : train_loss;
    if (config.keep_log) rep.log.push_back({epoch, train_loss, val_loss});
    rep.epochs = epoch;

    if (val_loss.total < rep.best_val) {
      rep.best_val = val_loss.total;
      rep.best_epoch = epoch;
      best = params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
    adam.step(params, backprop(params, inputs, out, da, db));
    if (!params.all_finite()) {
      rep.diverged = true;
      break;
    }
  }
  if (rep.best_epoch == 0) {
    rep.diverged = true;
    return rep;
  }

  const auto out = gcn::forward(best, inputs);
  if (!out.b().allFinite()) {
    rep.diverged = true;
    return rep;
  }
  rep.params = std::move(best);
  rep.b = rows_to_trajectory(out.b());
  if (out.has_a()) rep.a = rows_to_trajectory(out.a());
  return rep;
}

TrainResult train(const TrainConfig& config, const gcn::PreparedInputs& inputs,
                  const LossTargets& targets, int ap_count, int combo_count) {
  config.validate();
  require(targets.mp_count() == inputs.mp_count(), "train: targets and graph sizes differ");

  TrainResult result;
  std::vector<Trajectory> bs, as;
  for (int r = 0; r < config.repetitions; ++r) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    const auto split = split_nodes(inputs.mp_count(), config.val_fraction,
                                   config.resplit_per_repetition ? seed : config.seed, targets.alpha);
    auto rep = train_once(config, inputs, targets, ap_count, combo_count, seed, split);
    if (!rep.diverged) {
      bs.push_back(rep.b);
      if (!rep.a.empty()) as.push_back(rep.a);
    }
    result.runs.push_back(std::move(rep));
  }
  if (bs.empty()) throw NumericalFailure("train: every repetition diverged");
  result.estimate = median_trajectory(bs);
  if (!as.empty()) result.aux_estimate = median_trajectory(as);
  return result;
}

Trajectory median_trajectory(std::span<const Trajectory> runs) {
  require(!runs.empty(), "median_trajectory: no runs");
  const std::size_t n = runs.front().size();
  for (const auto& r : runs) require(r.size() == n, "median_trajectory: length mismatch");
  Trajectory out(n);
  std::vector<Vec2> column(runs.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r][i];
    out[i] = features::coordinate_median(column);
  }
  return out;
}

}  // namespace mingle::training
