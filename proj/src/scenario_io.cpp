#include "mingle/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mingle/errors.hpp"

namespace mingle::io {

namespace {

using nlohmann::json;

json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

Vec2 point_from(const json& j) {
  require(j.is_array() && j.size() == 2, "scenario: coordinates must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string scenario_to_json(const simulator::Scenario& sc) {
  json j;
  j["delta_s"] = sc.imu.delta;
  j["sample_rate"] = sc.imu.sample_rate;
  j["aps"] = json::array();
  for (const auto& z : sc.aps) j["aps"].push_back(point(z));
  j["gt"] = json::array();
  for (const auto& x : sc.truth) j["gt"].push_back(x.allFinite() ? point(x) : json(nullptr));
  j["rtt_s"] = json::array();
  for (int n = 0; n < sc.rtt.rows(); ++n) {
    json row = json::array();
    for (int m = 0; m < sc.rtt.cols(); ++m) row.push_back(sc.rtt(n, m));
    j["rtt_s"].push_back(std::move(row));
  }
  j["gyro_z"] = sc.imu.gyro_z;
  j["accel_norm"] = sc.imu.accel_norm;
  j["alpha"] = sc.alpha;
  return j.dump();
}

simulator::Scenario scenario_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("scenario: invalid JSON: ") + e.what());
  }
  simulator::Scenario sc;
  try {
    sc.imu.delta = j.at("delta_s").get<double>();
    sc.imu.sample_rate = j.at("sample_rate").get<double>();
    for (const auto& z : j.at("aps")) sc.aps.push_back(point_from(z));
    for (const auto& x : j.at("gt")) {
      sc.truth.push_back(x.is_null() ? Vec2::Constant(std::numeric_limits<double>::quiet_NaN())
                                     : point_from(x));
    }
    const auto& rtt = j.at("rtt_s");
    require(rtt.size() == sc.truth.size(), "scenario: rtt_s and gt lengths differ");
    sc.rtt.resize(static_cast<int>(rtt.size()), static_cast<int>(sc.aps.size()));
    for (std::size_t n = 0; n < rtt.size(); ++n) {
      require(rtt[n].size() == sc.aps.size(), "scenario: every RTT row needs one entry per AP");
      for (std::size_t m = 0; m < sc.aps.size(); ++m) {
        sc.rtt(static_cast<int>(n), static_cast<int>(m)) = rtt[n][m].get<double>();
      }
    }
    sc.imu.gyro_z = j.at("gyro_z").get<std::vector<double>>();
    sc.imu.accel_norm = j.at("accel_norm").get<std::vector<double>>();
    sc.alpha = j.at("alpha").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("scenario: ") + e.what());
  }
  require(sc.imu.delta > 0.0 && sc.imu.sample_rate > 0.0, "scenario: timing must be positive");
  require(sc.alpha.size() == sc.truth.size(), "scenario: alpha and gt lengths differ");
  require(sc.imu.gyro_z.size() == sc.imu.accel_norm.size(), "scenario: IMU channel lengths differ");
  require(sc.aps.size() >= 3, "scenario: need at least 3 APs");
  for (std::size_t n = 0; n < sc.alpha.size(); ++n) {
    require(sc.alpha[n] == 0 || sc.alpha[n] == 1, "scenario: alpha entries must be 0 or 1");
    require(sc.alpha[n] == 0 || sc.truth[n].allFinite(), "scenario: labeled MP without gt");
  }
  return sc;
}

void write_scenario(const simulator::Scenario& scenario, const std::string& path) {
  write_text(path, scenario_to_json(scenario));
}

simulator::Scenario read_scenario(const std::string& path) {
  return scenario_from_json(read_text(path));
}

std::string estimate_to_csv(const TrajectoryEstimate& estimate) {
  std::string out = "n,x,y\n";
  for (std::size_t i = 0; i < estimate.coords.size(); ++i) {
    out += std::to_string(i + 1) + "," + fixed(estimate.coords[i].x()) + "," +
           fixed(estimate.coords[i].y()) + "\n";
  }
  return out;
}

Trajectory estimate_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "estimate CSV: missing header");
  Trajectory t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int n = 0;
    double x = 0.0, y = 0.0;
    require(std::sscanf(line.c_str(), "%d,%lf,%lf", &n, &x, &y) == 3,
            "estimate CSV: malformed row '" + line + "'");
    require(n == static_cast<int>(t.size()) + 1, "estimate CSV: rows must be numbered 1..N");
    t.emplace_back(x, y);
  }
  return t;
}

void write_estimate(const TrajectoryEstimate& estimate, const std::string& path) {
  write_text(path, estimate_to_csv(estimate));
}

Trajectory read_estimate(const std::string& path) { return estimate_from_csv(read_text(path)); }

std::string report_to_json(const EvalReport& r) {
  json j;
  j["mae"] = r.mae;
  j["rmse"] = r.rmse;
  j["p50"] = r.p50;
  j["p75"] = r.p75;
  j["p95"] = r.p95;
  j["cdf"] = r.cdf;
  return j.dump(2);
}

std::string cdf_to_csv(const EvalReport& report) {
  std::string out = "error\n";
  for (double e : report.cdf) out += fixed(e) + "\n";
  return out;
}

std::string labels_to_json(const features::CdaLabels& labels) {
  json j;
  j["K"] = labels.params.k;
  j["Q1"] = labels.params.q1;
  j["Q2"] = labels.params.q2;
  j["labels"] = json::array();
  for (const auto& c : labels.c) j["labels"].push_back(point(c));
  return j.dump();
}

std::string loss_log_to_csv(const std::vector<training::EpochLog>& log) {
  std::string out = "epoch,train_total,val_total,mse1,mse2,mr\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "," + fixed(e.train.total, 9) + "," + fixed(e.val.total, 9) +
           "," + fixed(e.train.mse1, 9) + "," + fixed(e.train.mse2, 9) + "," +
           fixed(e.train.mr, 9) + "\n";
  }
  return out;
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += fixed(m(i, j), 9);
    }
    out += "\n";
  }
  return out;
}

std::string trajectory_svg(const Trajectory& truth, const Trajectory& estimate,
                           const std::vector<Vec2>& aps) {
  Eigen::AlignedBox2d box;
  for (const auto& p : truth) if (p.allFinite()) box.extend(p);
  for (const auto& p : estimate) box.extend(p);
  for (const auto& p : aps) box.extend(p);
  const Vec2 lo = box.min() - Vec2::Constant(2.0);
  const Vec2 hi = box.max() + Vec2::Constant(2.0);
  const double scale = 20.0;  // px per meter
  const double w = (hi.x() - lo.x()) * scale;
  const double h = (hi.y() - lo.y()) * scale;
  auto sx = [&](double x) { return (x - lo.x()) * scale; };
  auto sy = [&](double y) { return (hi.y() - y) * scale; };
  auto px = [&](const Vec2& p) { return fixed(sx(p.x()), 2) + "," + fixed(sy(p.y()), 2); };
  auto polyline = [&](const Trajectory& t, const char* color) {
    std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                    "\" stroke-width=\"2\" points=\"";
    for (const auto& p : t) if (p.allFinite()) s += px(p) + " ";
    return s + "\"/>\n";
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(w, 0) +
                    "\" height=\"" + fixed(h, 0) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double x = std::ceil(lo.x() / 5) * 5; x <= hi.x(); x += 5) {
    svg += "<line x1=\"" + fixed(sx(x), 2) + "\" y1=\"0\" x2=\"" + fixed(sx(x), 2) + "\" y2=\"" +
           fixed(h, 2) + "\" stroke=\"#eee\"/><text x=\"" + fixed(sx(x) + 2, 2) + "\" y=\"" +
           fixed(h - 4, 2) + "\" font-size=\"10\">" + fixed(x, 0) + " m</text>\n";
  }
  for (double y = std::ceil(lo.y() / 5) * 5; y <= hi.y(); y += 5) {
    svg += "<line x1=\"0\" y1=\"" + fixed(sy(y), 2) + "\" x2=\"" + fixed(w, 2) + "\" y2=\"" +
           fixed(sy(y), 2) + "\" stroke=\"#eee\"/><text x=\"2\" y=\"" + fixed(sy(y) - 2, 2) +
           "\" font-size=\"10\">" + fixed(y, 0) + " m</text>\n";
  }
  svg += polyline(truth, "#2a7");
  svg += polyline(estimate, "#c33");
  for (const auto& z : aps) {
    svg += "<rect x=\"" + fixed(sx(z.x()) - 4, 2) + "\" y=\"" + fixed(sy(z.y()) - 4, 2) +
           "\" width=\"8\" height=\"8\" fill=\"#36c\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path);
  out << text;
}

}  // namespace mingle::io
