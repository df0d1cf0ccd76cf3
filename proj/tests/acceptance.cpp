#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "mingle/baselines.hpp"
#include "mingle/errors.hpp"
#include "mingle/experiments.hpp"
#include "mingle/geometry.hpp"
#include "mingle/scenario_io.hpp"

using namespace mingle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

simulator::Scenario scene(const char* preset, std::uint64_t seed) {
  auto spec = simulator::preset(preset);
  spec.seed = seed;
  return simulator::generate(spec);
}

double rmse(const Trajectory& est, const Trajectory& truth) { return evaluate(est, truth).rmse; }

// 1. Analytic gradients against central finite differences.
Outcome gradient_check() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int instances = 0;
  for (; instances < 40; ++instances) {
    const int n = 5 + static_cast<int>(rng() % 6);
    const int m = 3 + static_cast<int>(rng() % 3);
    const int h1 = 1 + static_cast<int>(rng() % 4);
    std::vector<Vec2> aps;
    for (int j = 0; j < m; ++j) aps.emplace_back(12 * u(rng), 12 * u(rng));
    Matrix rtt(n, m);
    training::LossTargets t;
    for (int i = 0; i < n; ++i) {
      const Vec2 x(12 * u(rng), 12 * u(rng));
      t.truth.push_back(x);
      t.cda.push_back(x + Vec2(u(rng) - 0.5, u(rng) - 0.5));
      t.alpha.push_back(u(rng) < 0.3);
      for (int j = 0; j < m; ++j)
        rtt(i, j) = geometry::range_to_rtt((aps[j] - x).norm() + 0.05 + u(rng));
    }
    const int cut = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1));
    const std::vector<Course> courses{{0, cut - 1}, {cut, n - 1}};
    for (int i = 0; i < n; ++i) {
      t.step_scale.push_back(i < cut ? 1.0 : 1.0 + u(rng));
      t.course_start.push_back(i == cut);
    }
    features::FeatureSet fs;
    try {
      fs = features::build_features(rtt, aps, 3);
    } catch (const NumericalFailure&) {
      continue;  // a random draw with every AP triple collinear
    }
    const auto g = graphs::build_graphs(n, static_cast<int>(rng() % 3), courses);
    const auto routing = gcn::all_routings()[rng() % 8];
    const auto in = gcn::prepare_inputs(g, fs, routing);
    auto p = gcn::init_params(m, fs.combo_count(), h1, rng());
    p.w1 *= 3.0;
    p.w2 *= 3.0;
    const double lambda = 5.0 * u(rng);
    const auto analytic = training::gradients(p, in, t, lambda);
    auto total = [&] { return training::loss(gcn::forward(p, in), t, lambda).total; };
    for (Matrix gcn::GcnParams::*field :
         {&gcn::GcnParams::lift, &gcn::GcnParams::w1, &gcn::GcnParams::w2}) {
      Matrix& w = p.*field;
      const Matrix& dw = analytic.grad.*field;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double keep = w(i);
        const double h = 1e-5 * std::max(1.0, std::abs(keep));
        w(i) = keep + h;
        const double up = total();
        w(i) = keep - h;
        const double down = total();
        w(i) = keep;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(dw(i)));
        if (scale < 1e-10) continue;
        worst = std::max(worst, std::abs(numeric - dw(i)) / scale);
      }
    }
  }
  return {worst <= 1e-5 && instances >= 20,
          fmt("%d instances, max relative error %.2e (limit 1e-5)", instances, worst)};
}

// 2. Graph builders against literal double loops.
Outcome graph_oracles() {
  std::mt19937_64 rng(77);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 60);
    const int eps = static_cast<int>(rng() % 8);
    std::vector<Course> courses;
    for (int first = 0; first < n;) {
      const int last = std::min(n - 1, first + static_cast<int>(rng() % 12));
      courses.push_back({first, last});
      first = last + 1;
    }
    Matrix a(n, n), b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a(i, j) = std::abs(i - j) <= eps ? 1.0 : 0.0;
        b(i, j) = 0.0;
        for (const auto& c : courses) {
          if (i >= c.first && i <= c.last && j >= c.first && j <= c.last &&
              std::abs(i - j) <= c.length() / 2)
            b(i, j) = 1.0;
        }
      }
    }
    if (graphs::build_tmg(n, eps) != a || graphs::build_dmg(courses, n) != b) ++mismatches;
  }
  return {mismatches == 0, fmt("200 cases, %d mismatches", mismatches)};
}

// 3. CDA labels against exhaustive enumeration.
Vec2 cda_oracle(const Matrix& rtt, const std::vector<Vec2>& aps, int n, int q1, int q2) {
  const auto combos = features::enumerate_combos(static_cast<int>(aps.size()), 3);
  const int q_count = static_cast<int>(combos.size());
  std::vector<Vec2> pel(combos.size());
  std::vector<bool> ok(combos.size(), true);
  std::vector<std::tuple<double, int>> by_u;
  std::vector<double> rsum(combos.size());
  for (int q = 0; q < q_count; ++q) {
    std::vector<Vec2> za;
    std::vector<double> ra;
    rsum[q] = 0.0;
    for (int m : combos[q]) {
      za.push_back(aps[m]);
      ra.push_back(geometry::rtt_to_range(rtt(n, m)));
      rsum[q] += rtt(n, m);
    }
    try {
      pel[q] = geometry::lls_multilaterate(za, ra);
    } catch (const DegenerateGeometry&) {
      ok[q] = false;
    }
  }
  std::vector<Vec2> good;
  for (int q = 0; q < q_count; ++q)
    if (ok[q]) good.push_back(pel[q]);
  for (int q = 0; q < q_count; ++q) {
    if (!ok[q]) pel[q] = features::coordinate_median(good);
    double u = 0.0;
    for (int m : combos[q]) u += std::abs((aps[m] - pel[q]).norm() - geometry::rtt_to_range(rtt(n, m)));
    by_u.emplace_back(ok[q] ? u : INFINITY, q);
  }
  std::sort(by_u.begin(), by_u.end());
  std::vector<std::tuple<double, int>> by_r;
  for (int i = 0; i < q1; ++i) by_r.emplace_back(rsum[std::get<1>(by_u[i])], std::get<1>(by_u[i]));
  std::sort(by_r.begin(), by_r.end());
  std::vector<double> xs, ys;
  for (int i = 0; i < q2; ++i) {
    xs.push_back(pel[std::get<1>(by_r[i])].x());
    ys.push_back(pel[std::get<1>(by_r[i])].y());
  }
  return {median(xs), median(ys)};
}

Outcome cda_oracle_check() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0, labels = 0;
  for (int s = 0; s < 100; ++s) {
    std::vector<Vec2> aps;
    for (int j = 0; j < 5; ++j) aps.emplace_back(20 * u(rng), 15 * u(rng));
    const int n = 3 + static_cast<int>(rng() % 10);
    Matrix rtt(n, 5);
    for (int i = 0; i < n; ++i) {
      const Vec2 x(20 * u(rng), 15 * u(rng));
      for (int j = 0; j < 5; ++j) {
        double r = (aps[j] - x).norm() + 0.3 * (u(rng) - 0.5);
        if (u(rng) < 0.3) r += -3.0 * std::log1p(-u(rng));
        rtt(i, j) = geometry::range_to_rtt(std::max(0.1, r));
      }
    }
    const auto fs = features::build_features(rtt, aps, 3);
    const auto out = features::cda_label(fs, rtt, aps, 6, 3);
    for (int i = 0; i < n; ++i, ++labels)
      if (out.c[i] != cda_oracle(rtt, aps, i, 6, 3)) ++mismatches;
  }
  return {mismatches == 0, fmt("100 scenes, %d labels, %d mismatches", labels, mismatches)};
}

// 4. Noiseless recovery.
Outcome noiseless_recovery() {
  auto spec = simulator::preset("type1");
  spec.rtt_noise = 0.0;
  spec.nlos_prob = 0.0;
  const auto sc = simulator::generate(spec);
  const double lls = rmse(baselines::lls_rs_trajectory(sc).coords, sc.truth);
  const double cda = rmse(baselines::cda_trajectory(sc).coords, sc.truth);
  const auto run = experiments::run_mingle(sc, experiments::PipelineConfig{});
  const double b = rmse(run.estimate.coords, sc.truth);
  const double a = rmse(run.aux, sc.truth);
  return {lls <= 0.1 && cda <= 0.1 && b <= 0.1,
          fmt("RMSE LLS %.2e, CDA %.2e, MINGLE %.3f m (limit 0.1); aux output a %.3f m", lls, cda,
              b, a)};
}

// 5. Method ordering on the default preset.
Outcome method_ordering() {
  std::vector<double> m, c, e, l, a;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sc = scene("type3", seed);
    l.push_back(rmse(baselines::lls_rs_trajectory(sc).coords, sc.truth));
    c.push_back(rmse(baselines::cda_trajectory(sc).coords, sc.truth));
    e.push_back(rmse(baselines::ekf_trajectory(sc).coords, sc.truth));
    const auto run = experiments::run_mingle(sc, experiments::PipelineConfig{});
    m.push_back(rmse(run.estimate.coords, sc.truth));
    a.push_back(rmse(run.aux, sc.truth));
  }
  const double mm = median(m), mc = median(c), me = median(e), ml = median(l);
  const bool pass = mm < mc && mc <= me && me < ml && mm <= 0.9 * mc;
  return {pass, fmt("median RMSE MINGLE %.3f, CDA %.3f, EKF %.3f, LLS %.3f m; "
                    "MINGLE/CDA %.2f (limit 0.90); aux output a %.3f m",
                    mm, mc, me, ml, mm / mc, median(a))};
}

// 6. Semi-supervised gain on type4 with alpha = beta.
Outcome semi_gain() {
  int wins = 0;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto spec = simulator::preset("type4");
    spec.seed = seed;
    spec.supervision = simulator::Supervision::Corners;
    const auto sc = simulator::generate(spec);
    experiments::PipelineConfig self, semi;
    semi.mode = experiments::Mode::Semi;
    const double rs = rmse(experiments::run_mingle(sc, self).estimate.coords, sc.truth);
    const double rm = rmse(experiments::run_mingle(sc, semi).estimate.coords, sc.truth);
    wins += rm < rs;
    rows += fmt("%s%.2f/%.2f", seed == 1 ? "" : ", ", rm, rs);
  }
  return {wins >= 4, fmt("semi < self on %d/5 seeds (semi/self RMSE: %s)", wins, rows.c_str())};
}

// 7. Regularizer effect on day3.
Outcome regularizer_effect() {
  const std::vector<double> lambdas{0.0, 3.0, 10.0};
  int mae_ok = 0, var_ok = 0;
  std::string rows;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sc = scene("day3", seed);
    const auto sweep = experiments::run_lambda_sweep(sc, experiments::PipelineConfig{}, lambdas);
    mae_ok += sweep[1].report.mae <= sweep[0].report.mae;
    var_ok += sweep[0].gamma_variance > sweep[1].gamma_variance &&
              sweep[1].gamma_variance > sweep[2].gamma_variance;
    rows += fmt("%s[MAE %.2f/%.2f/%.2f var %.3f/%.3f/%.3f]", seed == 1 ? "" : " ",
                sweep[0].report.mae, sweep[1].report.mae, sweep[2].report.mae,
                sweep[0].gamma_variance, sweep[1].gamma_variance, sweep[2].gamma_variance);
  }
  return {mae_ok >= 4 && var_ok == 5,
          fmt("MAE(3) <= MAE(0) on %d/5, var strictly decreasing over lambda 0,3,10 on %d/5 %s",
              mae_ok, var_ok, rows.c_str())};
}

// 8. Cross-graph ablation rank.
Outcome ablation_rank() {
  int top2 = 0;
  std::string ranks;
  const auto target = gcn::default_routing();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rows = experiments::run_ablation(scene("type3", seed), experiments::PipelineConfig{});
    double mine = 0.0;
    for (const auto& r : rows)
      if (r.routing == target) mine = r.report.rmse;
    int rank = 1;
    std::string best;
    double best_rmse = INFINITY;
    for (const auto& r : rows) {
      rank += r.report.rmse < mine;
      if (r.report.rmse < best_rmse) {
        best_rmse = r.report.rmse;
        best = r.routing.name();
      }
    }
    top2 += rank <= 2;
    ranks += fmt("%s%d (%.2f m; best %s %.2f m)", seed == 1 ? "" : ", ", rank, mine, best.c_str(),
                 best_rmse);
  }
  return {top2 >= 4, fmt("F1-TMG+F2-DMG in top 2 on %d/5 seeds; rank per seed: %s", top2,
                         ranks.c_str())};
}

// 9. Byte-identical reruns.
Outcome determinism() {
  auto once = [] {
    const auto sc = io::scenario_from_json(io::scenario_to_json(scene("type2", 7)));
    return io::estimate_to_csv(experiments::run_mingle(sc, experiments::PipelineConfig{}).estimate);
  };
  const auto first = once();
  const auto second = once();
  return {first == second, fmt("two runs, %zu bytes each, %s", first.size(),
                               first == second ? "identical" : "different")};
}

// 10. Speed-ratio recovery.
Outcome speed_recovery() {
  std::vector<simulator::ScenarioSpec> specs;
  for (const char* p : {"type1", "type2", "type3", "type4"}) specs.push_back(simulator::preset(p));
  const double pi = 3.14159265358979323846;
  const std::vector<std::vector<double>> speed_sets{
      {0.5, 1.5, 0.5, 1.5}, {1.0, 3.0, 2.0, 1.2}, {0.8, 1.6, 2.4, 1.0}, {1.4, 1.0, 2.8, 2.0}};
  for (const auto& speeds : speed_sets) {
    simulator::ScenarioSpec s;
    s.start = {4.0, 4.0};
    const double lengths[] = {24.0, 15.0, 24.0, 15.0};
    for (int i = 0; i < 4; ++i) s.legs.push_back({i * pi / 2, lengths[i], speeds[i]});
    specs.push_back(s);
  }
  double worst = 0.0;
  int courses = 0;
  for (const auto& spec : specs) {
    const auto sc = simulator::generate(spec);
    const auto seg = sensing::segment_trajectory(sc.imu, sc.mp_count());
    if (seg.courses != sc.courses) return {false, "segmentation differs from the generator"};
    for (std::size_t l = 0; l < sc.courses.size(); ++l, ++courses)
      worst = std::max(worst, std::abs(seg.speed.ratio[l] / sc.speed_ratio[l] - 1.0));
  }
  return {worst <= 0.02, fmt("%zu scenarios, %d courses, max relative error %.3f%% (limit 2%%)",
                             specs.size(), courses, 100 * worst)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MINGLE acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (default all)");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double time_limit;  // s, 0 for none
  };
  const std::vector<Criterion> criteria{
      {"gradient correctness", gradient_check, 30.0},
      {"graph oracles", graph_oracles, 0.0},
      {"CDA oracle", cda_oracle_check, 0.0},
      {"noiseless recovery", noiseless_recovery, 120.0},
      {"method ordering", method_ordering, 600.0},
      {"semi-supervised gain", semi_gain, 0.0},
      {"regularizer effect", regularizer_effect, 0.0},
      {"cross-graph ablation", ablation_rank, 0.0},
      {"determinism", determinism, 0.0},
      {"speed-ratio recovery", speed_recovery, 0.0},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double limit = criteria[i].time_limit;
    if (limit > 0.0 && secs >= limit) {
      o.pass = false;
      o.detail += fmt("; runtime over the %.0f s limit", limit);
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id,
                criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
