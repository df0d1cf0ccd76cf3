#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mingle/baselines.hpp"
#include "mingle/errors.hpp"
#include "mingle/experiments.hpp"
#include "mingle/gcn.hpp"
#include "mingle/scenario_io.hpp"
#include "mingle/simulator.hpp"

namespace {

using namespace mingle;

constexpr int kExitContract = 2;
constexpr int kExitNumerical = 3;

struct TrainOptions {
  std::string mode = "self";
  double lambda = 3.0;
  int epsilon = 2;
  int h1 = 128;
  std::uint64_t seed = 1;
  std::string routing = "f1-tmg+f2-dmg";
  int repetitions = 5;
  int max_epochs = 6000;
  int patience = 200;
  double lr = 1e-2;
  bool freeze_split = false;
};

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--mode", o.mode, "self or semi")->check(CLI::IsMember({"self", "semi"}));
  cmd->add_option("--lambda", o.lambda, "mobility regularization weight");
  cmd->add_option("--epsilon", o.epsilon, "TMG temporal adjacency");
  cmd->add_option("--h1", o.h1, "hidden width");
  cmd->add_option("--seed", o.seed, "training seed");
  cmd->add_option("--routing", o.routing, "feature-graph routing, e.g. f1-tmg+f2-dmg");
  cmd->add_option("--repetitions", o.repetitions, "training repetitions (median taken)");
  cmd->add_option("--epochs", o.max_epochs, "maximum epochs per repetition");
  cmd->add_option("--patience", o.patience, "early-stopping patience");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_flag("--freeze-split", o.freeze_split, "reuse one validation split for all repetitions");
}

experiments::PipelineConfig to_config(const TrainOptions& o) {
  experiments::PipelineConfig c;
  c.mode = o.mode == "semi" ? experiments::Mode::Semi : experiments::Mode::Self;
  c.train.lambda = o.lambda;
  c.train.epsilon = o.epsilon;
  c.train.hidden = o.h1;
  c.train.seed = o.seed;
  c.train.routing = gcn::parse_routing(o.routing);
  c.train.repetitions = o.repetitions;
  c.train.max_epochs = o.max_epochs;
  c.train.patience = o.patience;
  c.train.learning_rate = o.lr;
  c.train.resplit_per_repetition = !o.freeze_split;
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text(path, text);
  }
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require(used == item.size(), "bad number '" + item + "'");
    } catch (const std::logic_error&) {
      throw ContractViolation("--values: bad number '" + item + "'");
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"MINGLE WiFi-RTT trajectory localization"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic scenario");
  std::string preset_name = "type3", sim_out, supervision = "corners";
  std::uint64_t sim_seed = 1;
  std::optional<double> noise, nlos_p, nlos_mu;
  sim->add_option("--preset", preset_name, "type1|type2|type3|type4|day3");
  sim->add_option("--seed", sim_seed, "scenario seed");
  sim->add_option("--noise", noise, "Gaussian range noise sigma (m)");
  sim->add_option("--nlos-p", nlos_p, "NLoS probability");
  sim->add_option("--nlos-mu", nlos_mu, "mean NLoS excess range (m)");
  sim->add_option("--supervision", supervision, "labels written to alpha")
      ->check(CLI::IsMember({"none", "corners", "uniform"}));
  sim->add_option("-o,--output", sim_out, "scenario JSON")->required();

  // cda
  auto* cda = app.add_subcommand("cda", "CDA pseudo-labels");
  std::string cda_in, cda_out;
  int cda_k = 3;
  std::optional<int> cda_q1, cda_q2;
  cda->add_option("scene", cda_in)->required();
  cda->add_option("-o,--output", cda_out, "labels JSON");
  cda->add_option("--k", cda_k, "APs per combination");
  cda->add_option("--q1", cda_q1, "combinations kept by residual");
  cda->add_option("--q2", cda_q2, "combinations kept by RTT sum");

  // localize
  auto* loc = app.add_subcommand("localize", "estimate the trajectory");
  std::string loc_in, loc_out, method = "mingle", svg_path, log_path, graphs_dir, ckpt_path,
      aux_path;
  TrainOptions loc_opts;
  double ekf_q = baselines::EkfParams{}.accel_psd, ekf_r = baselines::EkfParams{}.fix_variance;
  loc->add_option("scene", loc_in)->required();
  loc->add_option("--method", method)->check(CLI::IsMember({"lls", "cda", "ekf", "mingle"}));
  add_train_options(loc, loc_opts);
  loc->add_option("--ekf-q", ekf_q, "EKF white-acceleration PSD");
  loc->add_option("--ekf-r", ekf_r, "EKF fix variance (m^2)");
  loc->add_option("--svg", svg_path, "trajectory plot");
  loc->add_option("--loss-log", log_path, "per-epoch losses of the first repetition (CSV)");
  loc->add_option("--dump-graphs", graphs_dir, "directory for TMG/DMG CSVs");
  loc->add_option("--aux-output", aux_path, "TMG-side output a of cross-graph routings (CSV)");
  loc->add_option("--checkpoint", ckpt_path, "parameters of the first repetition (JSON)");
  loc->add_option("-o,--output", loc_out, "estimate CSV");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score an estimate against ground truth");
  std::string ev_scene, ev_est, ev_out, ev_cdf;
  ev->add_option("scene", ev_scene)->required();
  ev->add_option("estimate", ev_est)->required();
  ev->add_option("-o,--output", ev_out, "report JSON");
  ev->add_option("--cdf", ev_cdf, "sorted errors (CSV)");

  // ablate
  auto* ab = app.add_subcommand("ablate", "all eight feature-graph routings");
  std::string ab_in, ab_out;
  TrainOptions ab_opts;
  ab->add_option("scene", ab_in)->required();
  add_train_options(ab, ab_opts);
  ab->add_option("-o,--output", ab_out, "table CSV");

  // sweep-lambda
  auto* sw = app.add_subcommand("sweep-lambda", "retrain over several lambda values");
  std::string sw_in, sw_out, sw_values = "0,1,3,10,30";
  TrainOptions sw_opts;
  sw->add_option("scene", sw_in)->required();
  sw->add_option("--values", sw_values, "comma-separated lambdas");
  add_train_options(sw, sw_opts);
  sw->add_option("-o,--output", sw_out, "table CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitContract;
  }

  if (sim->parsed()) {
    auto spec = simulator::preset(preset_name);
    spec.seed = sim_seed;
    if (noise) spec.rtt_noise = *noise;
    if (nlos_p) spec.nlos_prob = *nlos_p;
    if (nlos_mu) spec.nlos_bias = *nlos_mu;
    spec.supervision = supervision == "none"      ? simulator::Supervision::None
                       : supervision == "uniform" ? simulator::Supervision::Uniform
                                                  : simulator::Supervision::Corners;
    io::write_scenario(simulator::generate(spec), sim_out);
  } else if (cda->parsed()) {
    const auto sc = io::read_scenario(cda_in);
    const auto fs = features::build_features(sc.rtt, sc.aps, cda_k);
    auto params = features::default_cda_params(fs.combo_count(), cda_k);
    if (cda_q1) params.q1 = *cda_q1;
    if (cda_q2) params.q2 = *cda_q2;
    emit(cda_out, io::labels_to_json(features::cda_label(fs, sc.rtt, sc.aps, params.q1, params.q2)) +
                      "\n");
  } else if (loc->parsed()) {
    const auto sc = io::read_scenario(loc_in);
    TrajectoryEstimate est;
    if (method == "lls") {
      est = baselines::lls_rs_trajectory(sc);
    } else if (method == "cda") {
      est = baselines::cda_trajectory(sc);
    } else if (method == "ekf") {
      baselines::EkfParams p;
      p.accel_psd = ekf_q;
      p.fix_variance = ekf_r;
      est = baselines::ekf_trajectory(sc, p);
    } else {
      auto config = to_config(loc_opts);
      config.train.keep_log = !log_path.empty();
      const auto pipeline = experiments::prepare_pipeline(sc, config);
      if (!graphs_dir.empty()) {
        std::filesystem::create_directories(graphs_dir);
        io::write_text(graphs_dir + "/tmg.csv", io::matrix_to_csv(pipeline.graphs.a));
        io::write_text(graphs_dir + "/dmg.csv", io::matrix_to_csv(pipeline.graphs.b));
      }
      const auto run = experiments::run_mingle(pipeline, config);
      est = run.estimate;
      if (!aux_path.empty()) {
        require(!run.aux.empty(), "--aux-output needs a cross-graph routing");
        auto aux = est;
        aux.coords = run.aux;
        io::write_estimate(aux, aux_path);
      }
      const training::RepetitionResult* first = nullptr;
      for (const auto& r : run.result.runs) {
        if (!r.diverged) {
          first = &r;
          break;
        }
      }
      if (first && !log_path.empty()) io::write_text(log_path, io::loss_log_to_csv(first->log));
      if (first && !ckpt_path.empty()) gcn::save_params(first->params, ckpt_path);
    }
    if (!svg_path.empty()) io::write_text(svg_path, io::trajectory_svg(sc.truth, est.coords, sc.aps));
    emit(loc_out, io::estimate_to_csv(est));
  } else if (ev->parsed()) {
    const auto sc = io::read_scenario(ev_scene);
    const auto est = io::read_estimate(ev_est);
    const auto report = evaluate(est, sc.truth);
    if (!ev_cdf.empty()) io::write_text(ev_cdf, io::cdf_to_csv(report));
    emit(ev_out, io::report_to_json(report) + "\n");
  } else if (ab->parsed()) {
    const auto rows = experiments::run_ablation(io::read_scenario(ab_in), to_config(ab_opts));
    emit(ab_out, experiments::ablation_to_csv(rows));
  } else if (sw->parsed()) {
    const auto values = parse_values(sw_values);
    const auto rows =
        experiments::run_lambda_sweep(io::read_scenario(sw_in), to_config(sw_opts), values);
    emit(sw_out, experiments::sweep_to_csv(rows));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mingle::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::logic_error& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
