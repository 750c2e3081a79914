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
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pemsim/detector.hpp"
#include "pemsim/harness/config.hpp"
#include "pemsim/harness/dataset.hpp"
#include "pemsim/planners.hpp"
#include "pemsim/scene.hpp"
#include "pemsim/surrogates/surrogate_model.hpp"

namespace pemsim::harness {

enum class PerceptionVariant { detector, ns, lr, gf, gt };

std::string to_string(PerceptionVariant v);
PerceptionVariant perception_variant_from_string(const std::string& name);
/// Which surrogate kind a variant needs; throws for the detector variant.
surrogates::SurrogateKind surrogate_kind_of(PerceptionVariant v);

/// Detector + tracker or a surrogate, with its own sampling stream.
class PerceptionStack {
 public:
  static PerceptionStack make_detector(const DetectorProfile& profile, std::uint64_t run_seed);
  static PerceptionStack make_surrogate(std::shared_ptr<const surrogates::SurrogateModel> model,
                                        std::uint64_t run_seed);

  PerceptionVariant variant() const { return variant_; }
  /// GF and GT ignore occlusion, so the ray cast can be skipped for them.
  bool needs_occlusion() const;
  std::vector<Detection> perceive(std::span<const SalientVector> salients, const Pose2D& ego_pose, double time);

 private:
  PerceptionVariant variant_ = PerceptionVariant::gt;
  DetectorProfile profile_;
  Tracker tracker_;
  std::shared_ptr<const surrogates::SurrogateModel> model_;
  std::mt19937_64 rng_;
};

/// Salient vectors of the current world; occlusion is ray cast only when `with_occlusion`.
std::vector<SalientVector> observe(const WorldState& world, const RayFanConfig& rays, bool with_occlusion);

/// Planner for the scenario kind (ACC planner or the route-following agent).
ControlCommand plan(const HarnessConfig& cfg, const WorldState& world, std::span<const Detection> detections,
                    PidState& pid);

/// Per-frame wall times in milliseconds.
struct TimingRecord {
  std::vector<double> observe_ms;     // low-fidelity state extraction and occlusion
  std::vector<double> perception_ms;  // detector or surrogate
  std::vector<double> planner_ms;
  std::vector<double> total_ms;       // whole loop iteration including the world step

  double median_observe() const;
  double median_perception() const;
  double median_planner() const;
  double median_total() const;
  nlohmann::json summary() const;
};

double median(std::vector<double> xs);

struct FrameView {
  int frame = 0;
  const WorldState& world;
  std::span<const SalientVector> salients;
  std::span<const Detection> detections;
  const ControlCommand& control;
  const PidState& pid_before;  // controller state before planning this frame
};

struct RunResult {
  std::vector<TraceRecord> records;
  bool truncated = false;  // ego left the map
  TimingRecord timing;
};

/// Closed loop: observe, perceive, plan, step. `on_frame` sees every frame before the step.
RunResult run_closed_loop(const HarnessConfig& cfg, const ScenarioSpec& spec, PerceptionStack& perception,
                          const std::function<void(const FrameView&)>& on_frame = {});

}  // namespace pemsim::harness
