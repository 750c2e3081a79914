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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pemsim/geometry.hpp"

namespace pemsim {

enum class ActorClass { vehicle = 0, pedestrian = 1 };
inline constexpr int kNumClasses = 2;

std::string to_string(ActorClass cls);
ActorClass actor_class_from_string(const std::string& name);

struct Extent {
  double length = 4.5;
  double width = 1.8;
};

struct ActorState {
  int id = 0;
  ActorClass cls = ActorClass::vehicle;
  Pose2D pose;
  double speed = 0.0;  // along heading
  double angular_velocity = 0.0;
  Extent extent;
  bool is_ego = false;

  OrientedBox box() const { return {pose.position(), extent.length, extent.width, pose.yaw}; }
  Vec2 velocity() const { return speed * pose.heading(); }
};

struct SpeedSegment {
  double start_time = 0.0;
  double speed = 0.0;
};

/// Linear lateral offset ramp (used for lane changes / cut-outs).
struct LateralShift {
  double start_time = 0.0;
  double duration = 3.0;
  double offset = 3.5;  // positive to the left of travel
};

/// Scripted, non-reactive motion along a path. Pose is a closed-form function of time.
struct ActorScript {
  Polyline path;
  double start_s = 0.0;
  std::vector<SpeedSegment> speed_profile;  // sorted by start_time; first segment starts at t=0
  std::optional<LateralShift> lateral_shift;

  double arc_length(double t) const;
  double path_speed(double t) const;
  double lateral_offset(double t) const;
  double lateral_rate(double t) const;

  struct Sample {
    Pose2D pose;
    double speed = 0.0;
    double angular_velocity = 0.0;
  };
  Sample sample(double t) const;
};

struct Lane {
  int id = 0;
  Polyline centreline;
  double width = 3.5;
};

struct Route {
  Polyline path;
  std::vector<Vec2> junctions;
};

struct EgoDynamics {
  double wheelbase = 2.8;
  double max_accel = 3.0;    // m/s^2 at full throttle
  double max_decel = 8.0;    // m/s^2 at full brake
  double max_steer = 0.6;    // rad
  double max_steer_rate = 1.5;  // rad/s
  double speed_max = 30.0;
};

struct ControlCommand {
  double throttle = 0.0;
  double brake = 0.0;
  double steer = 0.0;
};

enum class ScenarioKind { acc, urban_routes };

struct AccParams {
  double ego_speed = 15.0;
  double lead_gap = 30.0;         // centre-to-centre, metres
  double lead_speed = 15.0;
  double parked_distance = 220.0;  // ego centre to parked car centre
  double cut_out_time = 8.0;
  double cut_out_duration = 3.0;
  double road_length = 600.0;
};

struct UrbanParams {
  int num_vehicles = 20;
  int num_pedestrians = 0;
  double road_length = 300.0;
  double ego_speed = 8.0;
  double parked_fraction = 0.2;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::acc;
  double duration = 25.0;
  double timestep = 0.05;
  std::uint64_t seed = 0;
  double lane_width = 3.5;
  Extent ego_extent;
  EgoDynamics ego_dynamics;
  AccParams acc;
  UrbanParams urban;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

struct WorldState {
  double time = 0.0;
  std::vector<ActorState> actors;
  std::vector<Lane> lanes;
  Route ego_route;
  EgoDynamics ego_dynamics;
  double ego_steer = 0.0;
  /// Ids overlapping the ego at `time`.
  std::vector<int> collisions;
  /// Ids whose overlap with the ego started during the last step.
  std::vector<int> collision_onsets;
  /// Shared, immutable scripts keyed by actor id.
  std::shared_ptr<const std::map<int, ActorScript>> scripts;

  const ActorState& ego() const;
  ActorState& ego();
  const ActorState* find(int id) const;
};

WorldState build_acc_scenario(const ScenarioSpec& spec);
WorldState build_urban_scenario(const ScenarioSpec& spec, std::mt19937_64& rng);
/// Dispatches on spec.kind; the urban builder is seeded from spec.seed.
WorldState build_scenario(const ScenarioSpec& spec);

WorldState step_world(const WorldState& state, const ControlCommand& control, double dt);

struct SalientVector {
  int actor_id = 0;
  ActorClass cls = ActorClass::vehicle;
  Vec2 rel_position = Vec2::Zero();
  double rel_yaw = 0.0;
  double speed = 0.0;
  double angular_velocity = 0.0;
  Extent extent;
  double occlusion = 0.0;
  double distance = 0.0;
  std::array<double, kNumClasses> class_onehot{};

  /// World velocity rotated into the ego frame.
  Vec2 velocity() const;
  OrientedBox box() const { return {rel_position, extent.length, extent.width, rel_yaw}; }
};

std::vector<SalientVector> extract_salient(const WorldState& state, const std::map<int, double>& occlusions);

}  // namespace pemsim
