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

#include <span>

#include "pemsim/detector.hpp"
#include "pemsim/scene.hpp"

namespace pemsim {

struct PidGains {
  double kp = 0.8;
  double ki = 0.05;
  double kd = 0.1;
  double integral_clamp = 2.0;
};

struct PidState {
  double integral = 0.0;
  double prev_speed = 0.0;
  bool has_prev = false;
};

/// Speed PID; positive output drives throttle, negative drives brake. Both saturate at 1.
ControlCommand pid_control(double target_speed, double current_speed, PidState& state, const PidGains& gains,
                           double dt);

struct PlannerInput {
  Pose2D ego_pose;
  double ego_speed = 0.0;
  Extent ego_extent;
  std::span<const Detection> detections;  // ego frame; only detected entries are used
  const Route* route = nullptr;
  double lane_width = 3.5;
  double dt = 0.05;
};

struct AccConfig {
  double max_speed = 15.0;
  double lookahead = 50.0;
  double emergency_gap = 0.1;
  double gap_gain = 0.5;   // 1/s, target-speed increase per metre of gap beyond the standoff
  double standoff = 5.0;
  double pursuit_distance = 8.0;
  PidGains pid;
};

/// Cruise at max speed; slow to a slower same-lane vehicle's speed in proportion to the gap;
/// full brake below the emergency gap.
ControlCommand acc_plan(const PlannerInput& input, PidState& pid, const AccConfig& cfg = {});

struct BasicAgentConfig {
  double target_speed = 8.0;
  double junction_speed = 4.0;
  double junction_radius = 15.0;
  double lookahead = 50.0;
  double brake_distance = 6.0;  // rectangle length at standstill
  double brake_headway = 1.0;   // seconds of travel added to the rectangle
  double pedestrian_radius = 8.0;
  double pursuit_distance = 6.0;
  double route_end_margin = 1.0;
  PidGains pid;
};

/// Route following with pure pursuit, braking for vehicles with a corner in the lane rectangle
/// ahead and for pedestrians in the frontal semicircle; slower near junctions.
ControlCommand basic_agent_plan(const PlannerInput& input, PidState& pid, const BasicAgentConfig& cfg = {});

/// Pure-pursuit steer command in [-1, 1] towards the route point `distance` ahead.
double pure_pursuit_steer(const Pose2D& ego, const Route& route, double distance, const EgoDynamics& dyn = {});

}  // namespace pemsim
