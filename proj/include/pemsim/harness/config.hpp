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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pemsim/detector.hpp"
#include "pemsim/planners.hpp"
#include "pemsim/raycast.hpp"
#include "pemsim/scene.hpp"
#include "pemsim/surrogates/logistic_focal.hpp"
#include "pemsim/surrogates/neural_surrogate.hpp"

namespace pemsim::harness {

struct PklConfig {
  int samples = 16;
  double bandwidth = 0.5;
  int stride = 1;  // evaluate every stride-th frame
};

/// Everything a harness subcommand needs; every key is optional in the file and defaults as below.
struct HarnessConfig {
  ScenarioSpec scenario;
  DetectorProfile detector;
  RayFanConfig raycast;
  double iou_gate = 0.1;
  double max_range = 50.0;
  std::vector<int> train_scenarios = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> test_scenarios = {10};
  double validation_fraction = 0.1;
  surrogates::NSHyperparams ns;
  surrogates::FocalConfig lr;
  AccConfig acc_planner;
  BasicAgentConfig basic_planner;
  PklConfig pkl;
};

nlohmann::json config_to_json(const HarnessConfig& cfg);
/// Keys absent from `j` keep their defaults; unknown top-level keys are rejected.
HarnessConfig config_from_json(const nlohmann::json& j);

HarnessConfig load_config(const std::filesystem::path& path);
void save_config(const HarnessConfig& cfg, const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const HarnessConfig& cfg);
std::string fnv1a_hex(const std::string& data);

}  // namespace pemsim::harness
