#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mingle/gcn.hpp"
#include "mingle/types.hpp"

namespace mingle::training {

struct LossBreakdown {
  double mse1 = 0.0;  // sum of squared errors against ground truth (m^2)
  double mse2 = 0.0;  // sum of squared errors against CDA pseudo-labels (m^2)
  double mr = 0.0;    // variance of speed-normalized steps of b (m^2)
  double total = 0.0;
  double lambda = 0.0;
};

/// Recombines the parts: (mse1/2 + mse2/2)/(1+lambda) + lambda*mr/(1+lambda).
double combine(double mse1, double mse2, double mr, double lambda);

/// Everything the loss needs besides the network output. All vectors have
/// one entry per MP.
struct LossTargets {
  Trajectory truth;                 // read only where alpha == 1
  std::vector<int> alpha;           // 1 = ground truth known
  Trajectory cda;                   // pseudo-labels, read where alpha == 0
  std::vector<double> step_scale;   // v of the course containing each MP
  std::vector<bool> course_start;   // first MP of a course other than the first
  bool include_boundary_steps = true;

  int mp_count() const { return static_cast<int>(alpha.size()); }
};

/// Loss restricted to the MPs flagged in `active` (all MPs when empty).
/// A step gamma_n = ||b_n - b_{n-1}|| / v counts when MP n is active.
/// Throws ContractViolation for fewer than 3 MPs. Cross-graph outputs
/// contribute both a and b to the MSE terms; standalone outputs only b.
LossBreakdown loss(const gcn::ModelOutput& output, const LossTargets& targets, double lambda,
                   const std::vector<bool>& active = {});

/// Steps gamma_n that enter the regularizer, in MP order.
std::vector<double> speed_normalized_steps(const Matrix& b, const LossTargets& targets,
                                           const std::vector<bool>& active = {});

/// Population variance.
double variance(std::span<const double> values);

struct LossAndGradient {
  LossBreakdown loss;
  gcn::GcnParams grad;
};

/// Exact reverse-mode gradient of the total loss with respect to every
/// parameter matrix. The ReLU derivative at 0 is taken as 0.
LossAndGradient gradients(const gcn::GcnParams& params, const gcn::PreparedInputs& inputs,
                          const LossTargets& targets, double lambda,
                          const std::vector<bool>& active = {});

struct TrainConfig {
  int max_epochs = 6000;
  int patience = 200;
  int repetitions = 5;
  double val_fraction = 0.2;
  double learning_rate = 1e-2;
  double lambda = 3.0;
  int epsilon = 2;
  int hidden = 128;
  std::uint64_t seed = 1;
  bool resplit_per_repetition = true;
  bool keep_log = false;
  gcn::Routing routing = gcn::default_routing();

  void validate() const;
};

struct NodeSplit {
  std::vector<int> train;
  std::vector<int> val;
};

/// Uniform random split with floor(val_fraction * N) validation MPs, drawn
/// only from MPs without ground truth.
NodeSplit split_nodes(int n, double val_fraction, std::uint64_t seed,
                      std::span<const int> alpha = {});

struct EpochLog {
  int epoch = 0;
  LossBreakdown train;
  LossBreakdown val;
};

struct RepetitionResult {
  Trajectory b;
  Trajectory a;  // empty for standalone routings
  gcn::GcnParams params;  // best-validation parameters
  int epochs = 0;
  int best_epoch = 0;
  double best_val = 0.0;
  bool diverged = false;
  std::vector<EpochLog> log;
};

struct TrainResult {
  Trajectory estimate;      // per-coordinate median of b over converged repetitions
  Trajectory aux_estimate;  // same for a, when the routing has one
  std::vector<RepetitionResult> runs;
};

/// One training repetition: Adam on the full-graph forward pass, train loss
/// over the train split, early stopping on the validation loss, best
/// parameters restored at the end.
RepetitionResult train_once(const TrainConfig& config, const gcn::PreparedInputs& inputs,
                            const LossTargets& targets, int ap_count, int combo_count,
                            std::uint64_t seed, const NodeSplit& split);

/// Repeats train_once with seeds seed, seed+1, ... and takes the median.
/// Throws NumericalFailure when every repetition diverges.
TrainResult train(const TrainConfig& config, const gcn::PreparedInputs& inputs,
                  const LossTargets& targets, int ap_count, int combo_count);

/// Per-MP, per-coordinate median across trajectories of equal length.
Trajectory median_trajectory(std::span<const Trajectory> runs);

}  // namespace mingle::training
