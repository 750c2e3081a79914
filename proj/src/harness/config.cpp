// Copyright 2026 The pemsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pemsim/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace pemsim::harness {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string("config: ") + where + " must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw std::invalid_argument(std::string("config: unknown key '") + key + "' in " + where);
}

json pid_to_json(const PidGains& g) {
  return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}, {"integral_clamp", g.integral_clamp}};
}

PidGains pid_from_json(const json& j, PidGains g) {
  reject_unknown(j, {"kp", "ki", "kd", "integral_clamp"}, "pid");
  read(j, "kp", g.kp);
  read(j, "ki", g.ki);
  read(j, "kd", g.kd);
  read(j, "integral_clamp", g.integral_clamp);
  return g;
}

json scenario_to_json(const ScenarioSpec& s) {
  return {
      {"kind", s.kind == ScenarioKind::acc ? "acc" : "urban_routes"},
      {"duration", s.duration},
      {"timestep", s.timestep},
      {"seed", s.seed},
      {"lane_width", s.lane_width},
      {"ego_extent", {{"length", s.ego_extent.length}, {"width", s.ego_extent.width}}},
      {"ego_dynamics",
       {{"wheelbase", s.ego_dynamics.wheelbase},
        {"max_accel", s.ego_dynamics.max_accel},
        {"max_decel", s.ego_dynamics.max_decel},
        {"max_steer", s.ego_dynamics.max_steer},
        {"max_steer_rate", s.ego_dynamics.max_steer_rate},
        {"speed_max", s.ego_dynamics.speed_max}}},
      {"acc",
       {{"ego_speed", s.acc.ego_speed},
        {"lead_gap", s.acc.lead_gap},
        {"lead_speed", s.acc.lead_speed},
        {"parked_distance", s.acc.parked_distance},
        {"cut_out_time", s.acc.cut_out_time},
        {"cut_out_duration", s.acc.cut_out_duration},
        {"road_length", s.acc.road_length}}},
      {"urban",
       {{"num_vehicles", s.urban.num_vehicles},
        {"num_pedestrians", s.urban.num_pedestrians},
        {"road_length", s.urban.road_length},
        {"ego_speed", s.urban.ego_speed},
        {"parked_fraction", s.urban.parked_fraction}}},
  };
}

ScenarioSpec scenario_from_json(const json& j) {
  reject_unknown(j, {"kind", "duration", "timestep", "seed", "lane_width", "ego_extent", "ego_dynamics", "acc", "urban"},
                 "scenario");
  ScenarioSpec s;
  if (j.contains("kind")) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "acc") s.kind = ScenarioKind::acc;
    else if (kind == "urban_routes") s.kind = ScenarioKind::urban_routes;
    else throw std::invalid_argument("config: unknown scenario kind " + kind);
  }
  read(j, "duration", s.duration);
  read(j, "timestep", s.timestep);
  read(j, "seed", s.seed);
  read(j, "lane_width", s.lane_width);
  if (j.contains("ego_extent")) {
    const json& e = j.at("ego_extent");
    reject_unknown(e, {"length", "width"}, "scenario.ego_extent");
    read(e, "length", s.ego_extent.length);
    read(e, "width", s.ego_extent.width);
  }
  if (j.contains("ego_dynamics")) {
    const json& d = j.at("ego_dynamics");
    reject_unknown(d, {"wheelbase", "max_accel", "max_decel", "max_steer", "max_steer_rate", "speed_max"},
                   "scenario.ego_dynamics");
    read(d, "wheelbase", s.ego_dynamics.wheelbase);
    read(d, "max_accel", s.ego_dynamics.max_accel);
    read(d, "max_decel", s.ego_dynamics.max_decel);
    read(d, "max_steer", s.ego_dynamics.max_steer);
    read(d, "max_steer_rate", s.ego_dynamics.max_steer_rate);
    read(d, "speed_max", s.ego_dynamics.speed_max);
  }
  if (j.contains("acc")) {
    const json& a = j.at("acc");
    reject_unknown(a, {"ego_speed", "lead_gap", "lead_speed", "parked_distance", "cut_out_time", "cut_out_duration",
                       "road_length"},
                   "scenario.acc");
    read(a, "ego_speed", s.acc.ego_speed);
    read(a, "lead_gap", s.acc.lead_gap);
    read(a, "lead_speed", s.acc.lead_speed);
    read(a, "parked_distance", s.acc.parked_distance);
    read(a, "cut_out_time", s.acc.cut_out_time);
    read(a, "cut_out_duration", s.acc.cut_out_duration);
    read(a, "road_length", s.acc.road_length);
  }
  if (j.contains("urban")) {
    const json& u = j.at("urban");
    reject_unknown(u, {"num_vehicles", "num_pedestrians", "road_length", "ego_speed", "parked_fraction"}, "scenario.urban");
    read(u, "num_vehicles", s.urban.num_vehicles);
    read(u, "num_pedestrians", s.urban.num_pedestrians);
    read(u, "road_length", s.urban.road_length);
    read(u, "ego_speed", s.urban.ego_speed);
    read(u, "parked_fraction", s.urban.parked_fraction);
  }
  s.validate();
  return s;
}

json detector_to_json(const DetectorProfile& d) {
  return {{"intercept", d.intercept},
          {"coef_distance", d.coef_distance},
          {"coef_occlusion", d.coef_occlusion},
          {"coef_distance_occlusion", d.coef_distance_occlusion},
          {"sigma0", d.sigma0},
          {"sigma1", d.sigma1},
          {"kalman",
           {{"accel_psd", d.kalman.accel_psd},
            {"measurement_std", d.kalman.measurement_std},
            {"initial_velocity_std", d.kalman.initial_velocity_std}}},
          {"seed", d.seed},
          {"false_positive_rate", d.false_positive_rate},
          {"latency_pad_ms", d.latency_pad_ms}};
}

DetectorProfile detector_from_json(const json& j) {
  reject_unknown(j, {"intercept", "coef_distance", "coef_occlusion", "coef_distance_occlusion", "sigma0", "sigma1",
                     "kalman", "seed", "false_positive_rate", "latency_pad_ms"},
                 "detector");
  DetectorProfile d;
  read(j, "intercept", d.intercept);
  read(j, "coef_distance", d.coef_distance);
  read(j, "coef_occlusion", d.coef_occlusion);
  read(j, "coef_distance_occlusion", d.coef_distance_occlusion);
  read(j, "sigma0", d.sigma0);
  read(j, "sigma1", d.sigma1);
  if (j.contains("kalman")) {
    const json& k = j.at("kalman");
    reject_unknown(k, {"accel_psd", "measurement_std", "initial_velocity_std"}, "detector.kalman");
    read(k, "accel_psd", d.kalman.accel_psd);
    read(k, "measurement_std", d.kalman.measurement_std);
    read(k, "initial_velocity_std", d.kalman.initial_velocity_std);
  }
  read(j, "seed", d.seed);
  read(j, "false_positive_rate", d.false_positive_rate);
  read(j, "latency_pad_ms", d.latency_pad_ms);
  d.validate();
  return d;
}

}  // namespace

json config_to_json(const HarnessConfig& c) {
  return {
      {"scenario", scenario_to_json(c.scenario)},
      {"detector", detector_to_json(c.detector)},
      {"raycast",
       {{"ray_count", c.raycast.ray_count},
        {"fov", c.raycast.fov},
        {"max_range", c.raycast.max_range},
        {"sensor_offset", {{"x", c.raycast.sensor_offset.x}, {"y", c.raycast.sensor_offset.y}, {"yaw", c.raycast.sensor_offset.yaw}}}}},
      {"iou_gate", c.iou_gate},
      {"max_range", c.max_range},
      {"train_scenarios", c.train_scenarios},
      {"test_scenarios", c.test_scenarios},
      {"validation_fraction", c.validation_fraction},
      {"ns",
       {{"lr", c.ns.lr},
        {"iterations", c.ns.iterations},
        {"dropout", c.ns.dropout},
        {"batch_size", c.ns.batch_size},
        {"width", c.ns.width},
        {"blocks", c.ns.blocks},
        {"eval_every", c.ns.eval_every},
        {"distance_bins", c.ns.distance_bins},
        {"velocity_head", c.ns.velocity_head},
        {"seed", c.ns.seed}}},
      {"lr",
       {{"alpha", c.lr.alpha},
        {"gamma", c.lr.gamma},
        {"lr", c.lr.lr},
        {"iterations", c.lr.iterations},
        {"batch_size", c.lr.batch_size},
        {"seed", c.lr.seed}}},
      {"acc_planner",
       {{"max_speed", c.acc_planner.max_speed},
        {"lookahead", c.acc_planner.lookahead},
        {"emergency_gap", c.acc_planner.emergency_gap},
        {"gap_gain", c.acc_planner.gap_gain},
        {"standoff", c.acc_planner.standoff},
        {"pursuit_distance", c.acc_planner.pursuit_distance},
        {"pid", pid_to_json(c.acc_planner.pid)}}},
      {"basic_planner",
       {{"target_speed", c.basic_planner.target_speed},
        {"junction_speed", c.basic_planner.junction_speed},
        {"junction_radius", c.basic_planner.junction_radius},
        {"lookahead", c.basic_planner.lookahead},
        {"brake_distance", c.basic_planner.brake_distance},
        {"brake_headway", c.basic_planner.brake_headway},
        {"pedestrian_radius", c.basic_planner.pedestrian_radius},
        {"pursuit_distance", c.basic_planner.pursuit_distance},
        {"route_end_margin", c.basic_planner.route_end_margin},
        {"pid", pid_to_json(c.basic_planner.pid)}}},
      {"pkl", {{"samples", c.pkl.samples}, {"bandwidth", c.pkl.bandwidth}, {"stride", c.pkl.stride}}},
  };
}

HarnessConfig config_from_json(const json& j) {
  reject_unknown(j, {"scenario", "detector", "raycast", "iou_gate", "max_range", "train_scenarios", "test_scenarios",
                     "validation_fraction", "ns", "lr", "acc_planner", "basic_planner", "pkl"},
                 "config");
  HarnessConfig c;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("detector")) c.detector = detector_from_json(j.at("detector"));
  if (j.contains("raycast")) {
    const json& r = j.at("raycast");
    reject_unknown(r, {"ray_count", "fov", "max_range", "sensor_offset"}, "raycast");
    read(r, "ray_count", c.raycast.ray_count);
    read(r, "fov", c.raycast.fov);
    read(r, "max_range", c.raycast.max_range);
    if (r.contains("sensor_offset")) {
      const json& o = r.at("sensor_offset");
      reject_unknown(o, {"x", "y", "yaw"}, "raycast.sensor_offset");
      read(o, "x", c.raycast.sensor_offset.x);
      read(o, "y", c.raycast.sensor_offset.y);
      read(o, "yaw", c.raycast.sensor_offset.yaw);
    }
    c.raycast.validate();
  }
  read(j, "iou_gate", c.iou_gate);
  read(j, "max_range", c.max_range);
  read(j, "train_scenarios", c.train_scenarios);
  read(j, "test_scenarios", c.test_scenarios);
  read(j, "validation_fraction", c.validation_fraction);
  if (j.contains("ns")) {
    const json& n = j.at("ns");
    reject_unknown(n, {"lr", "iterations", "dropout", "batch_size", "width", "blocks", "eval_every", "distance_bins",
                       "velocity_head", "seed"},
                   "ns");
    read(n, "lr", c.ns.lr);
    read(n, "iterations", c.ns.iterations);
    read(n, "dropout", c.ns.dropout);
    read(n, "batch_size", c.ns.batch_size);
    read(n, "width", c.ns.width);
    read(n, "blocks", c.ns.blocks);
    read(n, "eval_every", c.ns.eval_every);
    read(n, "distance_bins", c.ns.distance_bins);
    read(n, "velocity_head", c.ns.velocity_head);
    read(n, "seed", c.ns.seed);
  }
  if (j.contains("lr")) {
    const json& l = j.at("lr");
    reject_unknown(l, {"alpha", "gamma", "lr", "iterations", "batch_size", "seed"}, "lr");
    read(l, "alpha", c.lr.alpha);
    read(l, "gamma", c.lr.gamma);
    read(l, "lr", c.lr.lr);
    read(l, "iterations", c.lr.iterations);
    read(l, "batch_size", c.lr.batch_size);
    read(l, "seed", c.lr.seed);
  }
  if (j.contains("acc_planner")) {
    const json& a = j.at("acc_planner");
    reject_unknown(a, {"max_speed", "lookahead", "emergency_gap", "gap_gain", "standoff", "pursuit_distance", "pid"},
                   "acc_planner");
    read(a, "max_speed", c.acc_planner.max_speed);
    read(a, "lookahead", c.acc_planner.lookahead);
    read(a, "emergency_gap", c.acc_planner.emergency_gap);
    read(a, "gap_gain", c.acc_planner.gap_gain);
    read(a, "standoff", c.acc_planner.standoff);
    read(a, "pursuit_distance", c.acc_planner.pursuit_distance);
    if (a.contains("pid")) c.acc_planner.pid = pid_from_json(a.at("pid"), c.acc_planner.pid);
  }
  if (j.contains("basic_planner")) {
    const json& b = j.at("basic_planner");
    reject_unknown(b, {"target_speed", "junction_speed", "junction_radius", "lookahead", "brake_distance",
                       "brake_headway", "pedestrian_radius", "pursuit_distance", "route_end_margin", "pid"},
                   "basic_planner");
    read(b, "target_speed", c.basic_planner.target_speed);
    read(b, "junction_speed", c.basic_planner.junction_speed);
    read(b, "junction_radius", c.basic_planner.junction_radius);
    read(b, "lookahead", c.basic_planner.lookahead);
    read(b, "brake_distance", c.basic_planner.brake_distance);
    read(b, "brake_headway", c.basic_planner.brake_headway);
    read(b, "pedestrian_radius", c.basic_planner.pedestrian_radius);
    read(b, "pursuit_distance", c.basic_planner.pursuit_distance);
    read(b, "route_end_margin", c.basic_planner.route_end_margin);
    if (b.contains("pid")) c.basic_planner.pid = pid_from_json(b.at("pid"), c.basic_planner.pid);
  }
  if (j.contains("pkl")) {
    const json& p = j.at("pkl");
    reject_unknown(p, {"samples", "bandwidth", "stride"}, "pkl");
    read(p, "samples", c.pkl.samples);
    read(p, "bandwidth", c.pkl.bandwidth);
    read(p, "stride", c.pkl.stride);
  }
  if (c.iou_gate < 0.0 || c.iou_gate >= 1.0) throw std::invalid_argument("config: iou_gate must be in [0,1)");
  if (c.validation_fraction <= 0.0 || c.validation_fraction >= 1.0)
    throw std::invalid_argument("config: validation_fraction must be in (0,1)");
  return c;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  return config_from_json(json::parse(in));
}

void save_config(const HarnessConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config " + path.string());
  out << config_to_json(cfg).dump(2) << '\n';
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const HarnessConfig& cfg) { return fnv1a_hex(config_to_json(cfg).dump()); }

}  // namespace pemsim::harness
