#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mingle/features.hpp"
#include "mingle/graphs.hpp"
#include "mingle/types.hpp"

namespace mingle::gcn {

enum class Input { F1, F2 };
enum class GraphKind { Tmg, Dmg };

struct Branch {
  Input input = Input::F2;
  GraphKind graph = GraphKind::Dmg;
  bool operator==(const Branch&) const = default;
};

/// Feature-to-graph routing. `primary` produces b (the reported estimate and
/// the input of the mobility regularizer). `aux`, when present, is the
/// second graph sharing W1 and W2 and produces a.
struct Routing {
  std::optional<Branch> aux;
  Branch primary;

  bool cross_graph() const { return aux.has_value(); }
  std::string name() const;
  bool operator==(const Routing&) const = default;
};

/// (F1-TMG, F2-DMG).
Routing default_routing();

/// The four standalone and four cross-graph routings, standalone first.
std::vector<Routing> all_routings();

/// Parses names like "f1-tmg+f2-dmg" or "f2-dmg" (case-insensitive).
Routing parse_routing(std::string_view text);

struct GcnParams {
  Matrix lift;  // M x 2Q, maps F1 into the width of F2
  Matrix w1;    // 2Q x h1
  Matrix w2;    // h1 x 2

  int hidden() const { return static_cast<int>(w1.cols()); }
  bool all_finite() const { return lift.allFinite() && w1.allFinite() && w2.allFinite(); }
  static GcnParams zeros_like(const GcnParams& p);
};

/// Glorot-uniform initialisation, deterministic per seed.
GcnParams init_params(int m, int q, int h1, std::uint64_t seed);

/// Graph-propagated features for one branch: G_hat * F. Constant during training.
struct PreparedBranch {
  Branch branch;
  Matrix adjacency;   // normalized
  Matrix propagated;  // G_hat F1 (N x M) or G_hat F2 (N x 2Q)
};

struct PreparedInputs {
  std::optional<PreparedBranch> aux;
  PreparedBranch primary;
  int mp_count() const { return static_cast<int>(primary.adjacency.rows()); }
};

PreparedInputs prepare_inputs(const graphs::MobilityGraphs& graphs,
                              const features::FeatureSet& features, const Routing& routing);

/// Activations of one branch, kept for the backward pass.
struct BranchTrace {
  Matrix hidden;  // ReLU(G_hat F2 W1) or ReLU(G_hat F1 L W1), N x h1
  Matrix pooled;  // G_hat hidden
  Matrix out;     // pooled W2, N x 2
};

struct ModelOutput {
  std::optional<BranchTrace> aux;
  BranchTrace primary;

  bool has_a() const { return aux.has_value(); }
  const Matrix& a() const { return aux->out; }
  const Matrix& b() const { return primary.out; }
  const Matrix& h_a1() const { return aux->hidden; }
  const Matrix& h_b1() const { return primary.hidden; }
};

ModelOutput forward(const GcnParams& params, const PreparedInputs& inputs);

/// Convenience overload that propagates the features first. Default routing
/// is h_a1 = ReLU(A_hat F1 L W1), h_b1 = ReLU(B_hat F2 W1), a = A_hat h_a1 W2,
/// b = B_hat h_b1 W2.
ModelOutput forward(const GcnParams& params, const graphs::MobilityGraphs& graphs,
                    const features::FeatureSet& features,
                    const Routing& routing = default_routing());

/// Row-major JSON checkpoint with a dimensions header.
std::string params_to_json(const GcnParams& params);
GcnParams params_from_json(std::string_view text);
void save_params(const GcnParams& params, const std::string& path);
GcnParams load_params(const std::string& path);

}  // namespace mingle::gcn
