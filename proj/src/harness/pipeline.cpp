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

#include "pemsim/harness/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pemsim/raycast.hpp"

namespace pemsim::harness {

std::string to_string(PerceptionVariant v) {
  switch (v) {
    case PerceptionVariant::detector: return "detector";
    case PerceptionVariant::ns: return "ns";
    case PerceptionVariant::lr: return "lr";
    case PerceptionVariant::gf: return "gf";
    case PerceptionVariant::gt: return "gt";
  }
  return "?";
}

PerceptionVariant perception_variant_from_string(const std::string& name) {
  if (name == "detector") return PerceptionVariant::detector;
  if (name == "ns") return PerceptionVariant::ns;
  if (name == "lr") return PerceptionVariant::lr;
  if (name == "gf") return PerceptionVariant::gf;
  if (name == "gt") return PerceptionVariant::gt;
  throw std::invalid_argument("unknown perception variant: " + name);
}

surrogates::SurrogateKind surrogate_kind_of(PerceptionVariant v) {
  switch (v) {
    case PerceptionVariant::ns: return surrogates::SurrogateKind::ns;
    case PerceptionVariant::lr: return surrogates::SurrogateKind::lr;
    case PerceptionVariant::gf: return surrogates::SurrogateKind::gf;
    case PerceptionVariant::gt: return surrogates::SurrogateKind::gt;
    case PerceptionVariant::detector: break;
  }
  throw std::invalid_argument("the detector variant has no surrogate model");
}

PerceptionStack PerceptionStack::make_detector(const DetectorProfile& profile, std::uint64_t run_seed) {
  profile.validate();
  PerceptionStack p;
  p.variant_ = PerceptionVariant::detector;
  p.profile_ = profile;
  p.tracker_ = Tracker(profile.kalman);
  std::seed_seq seq{static_cast<std::uint32_t>(profile.seed), static_cast<std::uint32_t>(profile.seed >> 32),
                    static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32), 0xde7u};
  p.rng_.seed(seq);
  return p;
}

PerceptionStack PerceptionStack::make_surrogate(std::shared_ptr<const surrogates::SurrogateModel> model,
                                                std::uint64_t run_seed) {
  if (!model) throw std::invalid_argument("surrogate perception needs a model");
  PerceptionStack p;
  switch (model->kind()) {
    case surrogates::SurrogateKind::gt: p.variant_ = PerceptionVariant::gt; break;
    case surrogates::SurrogateKind::gf: p.variant_ = PerceptionVariant::gf; break;
    case surrogates::SurrogateKind::lr: p.variant_ = PerceptionVariant::lr; break;
    case surrogates::SurrogateKind::ns: p.variant_ = PerceptionVariant::ns; break;
  }
  p.model_ = std::move(model);
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32), 0x5u};
  p.rng_.seed(seq);
  return p;
}

bool PerceptionStack::needs_occlusion() const {
  return variant_ == PerceptionVariant::detector || variant_ == PerceptionVariant::ns ||
         variant_ == PerceptionVariant::lr;
}

std::vector<Detection> PerceptionStack::perceive(std::span<const SalientVector> salients, const Pose2D& ego_pose,
                                                 double time) {
  if (variant_ == PerceptionVariant::detector)
    return tracker_.process(detect(salients, profile_, rng_), ego_pose, time);
  return model_->perceive(salients, rng_);
}

std::vector<SalientVector> observe(const WorldState& world, const RayFanConfig& rays, bool with_occlusion) {
  std::map<int, double> occ;
  if (with_occlusion) {
    occ = occlusion_fractions(world, rays);
  } else {
    for (const auto& a : world.actors)
      if (!a.is_ego) occ[a.id] = 0.0;
  }
  return extract_salient(world, occ);
}

ControlCommand plan(const HarnessConfig& cfg, const WorldState& world, std::span<const Detection> detections,
                    PidState& pid) {
  const ActorState& ego = world.ego();
  PlannerInput in;
  in.ego_pose = ego.pose;
  in.ego_speed = ego.speed;
  in.ego_extent = ego.extent;
  in.detections = detections;
  in.route = &world.ego_route;
  in.lane_width = cfg.scenario.lane_width;
  in.dt = cfg.scenario.timestep;
  if (cfg.scenario.kind == ScenarioKind::acc) return acc_plan(in, pid, cfg.acc_planner);
  return basic_agent_plan(in, pid, cfg.basic_planner);
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double TimingRecord::median_observe() const { return median(observe_ms); }
double TimingRecord::median_perception() const { return median(perception_ms); }
double TimingRecord::median_planner() const { return median(planner_ms); }
double TimingRecord::median_total() const { return median(total_ms); }

nlohmann::json TimingRecord::summary() const {
  return {{"frames", total_ms.size()},
          {"median_observe_ms", median_observe()},
          {"median_perception_ms", median_perception()},
          {"median_planner_ms", median_planner()},
          {"median_total_ms", median_total()}};
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

// The ego is off the map once it strays this many lane widths from its route.
constexpr double kOffRouteLanes = 3.0;

}  // namespace

RunResult run_closed_loop(const HarnessConfig& cfg, const ScenarioSpec& spec, PerceptionStack& perception,
                          const std::function<void(const FrameView&)>& on_frame) {
  spec.validate();
  WorldState world = build_scenario(spec);
  const int steps = static_cast<int>(std::llround(spec.duration / spec.timestep));
  RunResult result;
  result.records.reserve(static_cast<std::size_t>(steps) + 1);
  PidState pid;
  std::vector<int> onsets;  // contacts that began on the step into the current frame

  for (int k = 0; k <= steps; ++k) {
    const auto t0 = Clock::now();
    const std::vector<SalientVector> salients = observe(world, cfg.raycast, perception.needs_occlusion());
    const auto t1 = Clock::now();
    const std::vector<Detection> dets = perception.perceive(salients, world.ego().pose, world.time);
    const auto t2 = Clock::now();
    const PidState pid_before = pid;
    const ControlCommand cmd = plan(cfg, world, dets, pid);
    const auto t3 = Clock::now();

    const ActorState& ego = world.ego();
    result.records.push_back({world.time, ego.pose, ego.speed, cmd.throttle, cmd.brake, cmd.steer, onsets});
    if (on_frame) on_frame(FrameView{k, world, salients, dets, cmd, pid_before});

    const double off = std::abs(world.ego_route.path.project(ego.pose.position()).lateral);
    if (off > kOffRouteLanes * spec.lane_width) {
      result.truncated = true;
      break;
    }
    if (k == steps) {
      result.timing.observe_ms.push_back(ms_between(t0, t1));
      result.timing.perception_ms.push_back(ms_between(t1, t2));
      result.timing.planner_ms.push_back(ms_between(t2, t3));
      result.timing.total_ms.push_back(ms_between(t0, Clock::now()));
      break;
    }
    world = step_world(world, cmd, spec.timestep);
    onsets = world.collision_onsets;
    result.timing.observe_ms.push_back(ms_between(t0, t1));
    result.timing.perception_ms.push_back(ms_between(t1, t2));
    result.timing.planner_ms.push_back(ms_between(t2, t3));
    result.timing.total_ms.push_back(ms_between(t0, Clock::now()));
  }
  return result;
}

}  // namespace pemsim::harness
