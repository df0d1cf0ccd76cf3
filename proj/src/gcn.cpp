#include "mingle/gcn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mingle/errors.hpp"

namespace mingle::gcn {

namespace {

std::string branch_name(const Branch& b) {
  std::string s = b.input == Input::F1 ? "F1" : "F2";
  s += b.graph == GraphKind::Tmg ? "-TMG" : "-DMG";
  return s;
}

Branch parse_branch(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  Branch b;
  if (t == "f1-tmg") b = {Input::F1, GraphKind::Tmg};
  else if (t == "f2-tmg") b = {Input::F2, GraphKind::Tmg};
  else if (t == "f1-dmg") b = {Input::F1, GraphKind::Dmg};
  else if (t == "f2-dmg") b = {Input::F2, GraphKind::Dmg};
  else throw ContractViolation("unknown feature-graph branch '" + std::string(text) + "'");
  return b;
}

Matrix glorot(int rows, int cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  // Fill row-major so the draw order matches the checkpoint layout.
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

PreparedBranch prepare_branch(const Branch& branch, const graphs::MobilityGraphs& g,
                              const features::FeatureSet& fs) {
  PreparedBranch p;
  p.branch = branch;
  p.adjacency = branch.graph == GraphKind::Tmg ? g.a_norm : g.b_norm;
  const Matrix& f = branch.input == Input::F1 ? fs.f1 : fs.f2;
  require(p.adjacency.rows() == f.rows(), "prepare_inputs: graph size != feature rows");
  p.propagated = p.adjacency * f;
  return p;
}

BranchTrace run_branch(const GcnParams& params, const PreparedBranch& pb) {
  BranchTrace t;
  require(params.lift.cols() == params.w1.rows(), "forward: lift width != W1 rows");
  if (pb.branch.input == Input::F1) {
    require(pb.propagated.cols() == params.lift.rows(), "forward: F1 width != lift rows");
    // (G F1)(L W1) is far cheaper than ((G F1) L) W1 when M << 2Q.
    t.hidden = (pb.propagated * (params.lift * params.w1)).cwiseMax(0.0);
  } else {
    require(pb.propagated.cols() == params.w1.rows(), "forward: F2 width != W1 rows");
    t.hidden = (pb.propagated * params.w1).cwiseMax(0.0);
  }
  t.pooled = pb.adjacency * t.hidden;
  t.out = t.pooled * params.w2;
  return t;
}

nlohmann::json matrix_json(const Matrix& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  return flat;
}

Matrix matrix_from(const nlohmann::json& j, int rows, int cols) {
  const auto flat = j.get<std::vector<double>>();
  require(flat.size() == static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
          "checkpoint: matrix size does not match header");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int jj = 0; jj < cols; ++jj) m(i, jj) = flat[static_cast<std::size_t>(i * cols + jj)];
  return m;
}

}  // namespace

std::string Routing::name() const {
  if (!aux) return branch_name(primary);
  return branch_name(*aux) + "+" + branch_name(primary);
}

Routing default_routing() {
  return {Branch{Input::F1, GraphKind::Tmg}, Branch{Input::F2, GraphKind::Dmg}};
}

std::vector<Routing> all_routings() {
  const Branch f1t{Input::F1, GraphKind::Tmg};
  const Branch f2t{Input::F2, GraphKind::Tmg};
  const Branch f1d{Input::F1, GraphKind::Dmg};
  const Branch f2d{Input::F2, GraphKind::Dmg};
  return {
      {std::nullopt, f1t}, {std::nullopt, f2t}, {std::nullopt, f1d}, {std::nullopt, f2d},
      {f1t, f1d},          {f1t, f2d},          {f2t, f1d},          {f2t, f2d},
  };
}

Routing parse_routing(std::string_view text) {
  const auto plus = text.find('+');
  if (plus == std::string_view::npos) return {std::nullopt, parse_branch(text)};
  Routing r{parse_branch(text.substr(0, plus)), parse_branch(text.substr(plus + 1))};
  require(r.aux->graph == GraphKind::Tmg && r.primary.graph == GraphKind::Dmg,
          "cross-graph routing must pair a TMG branch with a DMG branch");
  return r;
}

GcnParams GcnParams::zeros_like(const GcnParams& p) {
  return {Matrix::Zero(p.lift.rows(), p.lift.cols()), Matrix::Zero(p.w1.rows(), p.w1.cols()),
          Matrix::Zero(p.w2.rows(), p.w2.cols())};
}

GcnParams init_params(int m, int q, int h1, std::uint64_t seed) {
  require(m >= 1 && q >= 1, "init_params: M and Q must be positive");
  require(h1 >= 1, "init_params: hidden width must be at least 1");
  std::mt19937_64 rng(seed);
  GcnParams p;
  p.lift = glorot(m, 2 * q, rng);
  p.w1 = glorot(2 * q, h1, rng);
  p.w2 = glorot(h1, 2, rng);
  return p;
}

PreparedInputs prepare_inputs(const graphs::MobilityGraphs& graphs,
                              const features::FeatureSet& features, const Routing& routing) {
  PreparedInputs in;
  in.primary = prepare_branch(routing.primary, graphs, features);
  if (routing.aux) in.aux = prepare_branch(*routing.aux, graphs, features);
  return in;
}

ModelOutput forward(const GcnParams& params, const PreparedInputs& inputs) {
  require(params.w2.rows() == params.w1.cols() && params.w2.cols() == 2,
          "forward: W2 must be h1 x 2");
  ModelOutput out;
  out.primary = run_branch(params, inputs.primary);
  if (inputs.aux) out.aux = run_branch(params, *inputs.aux);
  return out;
}

ModelOutput forward(const GcnParams& params, const graphs::MobilityGraphs& graphs,
                    const features::FeatureSet& features, const Routing& routing) {
  return forward(params, prepare_inputs(graphs, features, routing));
}

std::string params_to_json(const GcnParams& params) {
  nlohmann::json j;
  j["m"] = params.lift.rows();
  j["two_q"] = params.lift.cols();
  j["h1"] = params.hidden();
  j["lift"] = matrix_json(params.lift);
  j["w1"] = matrix_json(params.w1);
  j["w2"] = matrix_json(params.w2);
  return j.dump();
}

GcnParams params_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("checkpoint: ") + e.what());
  }
  const int m = j.at("m").get<int>();
  const int two_q = j.at("two_q").get<int>();
  const int h1 = j.at("h1").get<int>();
  return {matrix_from(j.at("lift"), m, two_q), matrix_from(j.at("w1"), two_q, h1),
          matrix_from(j.at("w2"), h1, 2)};
}

void save_params(const GcnParams& params, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write checkpoint " + path);
  out << params_to_json(params) << '\n';
}

GcnParams load_params(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot read checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

}  // namespace mingle::gcn
