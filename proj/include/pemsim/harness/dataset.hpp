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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pemsim/metrics.hpp"
#include "pemsim/scene.hpp"
#include "pemsim/surrogates/features.hpp"

namespace pemsim::harness {

inline constexpr int kRecordVersion = 1;

/// A detector output that matched no ground-truth actor.
struct FalsePositiveRecord {
  int scenario = 0;
  int frame = 0;
  Vec2 position = Vec2::Zero();
  double distance = 0.0;
};

struct Dataset {
  std::vector<surrogates::TrainingTuple> tuples;
  std::vector<FalsePositiveRecord> false_positives;

  /// Rows whose scenario index is in `scenarios`.
  Dataset subset(const std::vector<int>& scenarios) const;
};

nlohmann::json salient_to_json(const SalientVector& s);
SalientVector salient_from_json(const nlohmann::json& j);

nlohmann::json tuple_to_json(const surrogates::TrainingTuple& t);
surrogates::TrainingTuple tuple_from_json(const nlohmann::json& j);

/// JSON-lines: one record per line, each with "version" and "type" ("tuple" or "false_positive").
void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

/// One closed-loop frame of the ego, as written to a trace file.
struct TraceRecord {
  double t = 0.0;
  Pose2D ego_pose;
  double ego_speed = 0.0;
  double throttle = 0.0;
  double brake = 0.0;
  double steer = 0.0;
  std::vector<int> collisions;  // ids whose contact with the ego began at this frame
};

void write_trace(const std::vector<TraceRecord>& records, bool truncated, const std::filesystem::path& path);
std::vector<TraceRecord> read_trace_records(const std::filesystem::path& path, bool* truncated = nullptr);
metrics::TrajectoryTrace to_trajectory(const std::vector<TraceRecord>& records);

/// Lists produced artifacts with the config hash and seed that made them.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path path);

  /// Replaces any existing entry with the same path.
  void add(const std::filesystem::path& artifact, const std::string& kind, const std::string& config_hash,
           std::uint64_t seed, nlohmann::json extra = nlohmann::json::object());
  void save() const;
  const nlohmann::json& data() const { return data_; }

 private:
  std::filesystem::path path_;
  nlohmann::json data_;
};

}  // namespace pemsim::harness
