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

#include "pemsim/harness/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace pemsim::harness {

using nlohmann::json;

Dataset Dataset::subset(const std::vector<int>& scenarios) const {
  auto keep = [&](int s) { return std::find(scenarios.begin(), scenarios.end(), s) != scenarios.end(); };
  Dataset out;
  for (const auto& t : tuples)
    if (keep(t.scenario)) out.tuples.push_back(t);
  for (const auto& f : false_positives)
    if (keep(f.scenario)) out.false_positives.push_back(f);
  return out;
}

json salient_to_json(const SalientVector& s) {
  return {{"class", to_string(s.cls)},
          {"x", s.rel_position.x()},
          {"y", s.rel_position.y()},
          {"yaw", s.rel_yaw},
          {"speed", s.speed},
          {"angular_velocity", s.angular_velocity},
          {"length", s.extent.length},
          {"width", s.extent.width},
          {"occlusion", s.occlusion},
          {"distance", s.distance}};
}

SalientVector salient_from_json(const json& j) {
  SalientVector s;
  s.cls = actor_class_from_string(j.at("class").get<std::string>());
  s.rel_position = {j.at("x").get<double>(), j.at("y").get<double>()};
  s.rel_yaw = j.at("yaw").get<double>();
  s.speed = j.at("speed").get<double>();
  s.angular_velocity = j.at("angular_velocity").get<double>();
  s.extent = {j.at("length").get<double>(), j.at("width").get<double>()};
  s.occlusion = j.at("occlusion").get<double>();
  s.distance = j.at("distance").get<double>();
  s.class_onehot.fill(0.0);
  s.class_onehot[static_cast<int>(s.cls)] = 1.0;
  return s;
}

json tuple_to_json(const surrogates::TrainingTuple& t) {
  json target = {{"detected", t.detected}, {"dx", nullptr}, {"dy", nullptr}, {"dvx", nullptr}, {"dvy", nullptr}};
  if (t.detected) {
    target["dx"] = t.position_error.x();
    target["dy"] = t.position_error.y();
    if (t.velocity_error) {
      target["dvx"] = t.velocity_error->x();
      target["dvy"] = t.velocity_error->y();
    }
  }
  return {{"version", kRecordVersion}, {"type", "tuple"},
          {"scenario", t.scenario},    {"frame", t.frame},
          {"actor_id", t.salient.actor_id}, {"salient", salient_to_json(t.salient)},
          {"target", target}};
}

surrogates::TrainingTuple tuple_from_json(const json& j) {
  surrogates::TrainingTuple t;
  t.scenario = j.at("scenario").get<int>();
  t.frame = j.at("frame").get<int>();
  t.salient = salient_from_json(j.at("salient"));
  t.salient.actor_id = j.at("actor_id").get<int>();
  const json& target = j.at("target");
  t.detected = target.at("detected").get<bool>();
  if (t.detected) {
    t.position_error = {target.at("dx").get<double>(), target.at("dy").get<double>()};
    if (!target.at("dvx").is_null()) t.velocity_error = Vec2(target.at("dvx").get<double>(), target.at("dvy").get<double>());
  }
  return t;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  for (const auto& t : data.tuples) out << tuple_to_json(t).dump() << '\n';
  for (const auto& f : data.false_positives)
    out << json{{"version", kRecordVersion}, {"type", "false_positive"}, {"scenario", f.scenario},
                {"frame", f.frame},          {"x", f.position.x()},         {"y", f.position.y()},
                {"distance", f.distance}}
               .dump()
        << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset " + path.string());
  Dataset data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.value("version", 0) != kRecordVersion)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": unsupported record version");
    const auto type = j.at("type").get<std::string>();
    if (type == "tuple") {
      data.tuples.push_back(tuple_from_json(j));
    } else if (type == "false_positive") {
      FalsePositiveRecord f;
      f.scenario = j.at("scenario").get<int>();
      f.frame = j.at("frame").get<int>();
      f.position = {j.at("x").get<double>(), j.at("y").get<double>()};
      f.distance = j.at("distance").get<double>();
      data.false_positives.push_back(f);
    } else {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": unknown record type " + type);
    }
  }
  return data;
}

void write_trace(const std::vector<TraceRecord>& records, bool truncated, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  out << json{{"version", kRecordVersion}, {"type", "header"}, {"truncated", truncated}}.dump() << '\n';
  for (const auto& r : records) {
    out << json{{"version", kRecordVersion},
                {"type", "frame"},
                {"t", r.t},
                {"ego_pose", {{"x", r.ego_pose.x}, {"y", r.ego_pose.y}, {"yaw", r.ego_pose.yaw}}},
                {"ego_speed", r.ego_speed},
                {"throttle", r.throttle},
                {"brake", r.brake},
                {"steer", r.steer},
                {"collisions", r.collisions}}
               .dump()
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TraceRecord> read_trace_records(const std::filesystem::path& path, bool* truncated) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trace " + path.string());
  std::vector<TraceRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.value("version", 0) != kRecordVersion) throw std::runtime_error(path.string() + ": unsupported trace version");
    if (j.at("type") == "header") {
      if (truncated) *truncated = j.at("truncated").get<bool>();
      continue;
    }
    TraceRecord r;
    r.t = j.at("t").get<double>();
    const json& p = j.at("ego_pose");
    r.ego_pose = {p.at("x").get<double>(), p.at("y").get<double>(), p.at("yaw").get<double>()};
    r.ego_speed = j.at("ego_speed").get<double>();
    r.throttle = j.at("throttle").get<double>();
    r.brake = j.at("brake").get<double>();
    r.steer = j.at("steer").get<double>();
    r.collisions = j.at("collisions").get<std::vector<int>>();
    records.push_back(std::move(r));
  }
  return records;
}

metrics::TrajectoryTrace to_trajectory(const std::vector<TraceRecord>& records) {
  metrics::TrajectoryTrace tr;
  for (const auto& r : records) {
    tr.t.push_back(r.t);
    tr.position.push_back(r.ego_pose.position());
    tr.velocity.push_back(r.ego_speed * r.ego_pose.heading());
    tr.brake.push_back(r.brake);
    if (!r.collisions.empty()) tr.collision_times.push_back(r.t);
  }
  return tr;
}

Manifest::Manifest(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (in) data_ = json::parse(in);
  if (!data_.is_object() || !data_.contains("artifacts")) data_ = {{"version", kRecordVersion}, {"artifacts", json::array()}};
}

void Manifest::add(const std::filesystem::path& artifact, const std::string& kind, const std::string& config_hash,
                   std::uint64_t seed, json extra) {
  const std::string rel = artifact.lexically_relative(path_.parent_path()).generic_string();
  const std::string key = rel.empty() ? artifact.generic_string() : rel;
  json& list = data_["artifacts"];
  for (auto it = list.begin(); it != list.end(); ++it) {
    if (it->at("path") == key) {
      list.erase(it);
      break;
    }
  }
  json entry = {{"path", key}, {"kind", kind}, {"config_hash", config_hash}, {"seed", seed}};
  for (auto& [k, v] : extra.items()) entry[k] = v;
  list.push_back(std::move(entry));
  std::sort(list.begin(), list.end(), [](const json& a, const json& b) {
    return a.at("path").get<std::string>() < b.at("path").get<std::string>();
  });
}

void Manifest::save() const {
  std::ofstream out(path_);
  if (!out) throw std::runtime_error("cannot write manifest " + path_.string());
  out << data_.dump(2) << '\n';
}

}  // namespace pemsim::harness
