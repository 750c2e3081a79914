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

#include "pemsim/planners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pemsim {

ControlCommand pid_control(double target_speed, double current_speed, PidState& state, const PidGains& gains,
                           double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_control: dt must be positive");
  const double error = target_speed - current_speed;
  state.integral = std::clamp(state.integral + error * dt, -gains.integral_clamp, gains.integral_clamp);
  // Derivative on the measured speed, so jumps in the target do not kick the output.
  const double derivative = state.has_prev ? -(current_speed - state.prev_speed) / dt : 0.0;
  state.prev_speed = current_speed;
  state.has_prev = true;
  const double u = gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
  ControlCommand cmd;
  if (u > 0.0) {
    cmd.throttle = std::min(u, 1.0);
  } else {
    cmd.brake = std::min(-u, 1.0);
  }
  return cmd;
}

double pure_pursuit_steer(const Pose2D& ego, const Route& route, double distance, const EgoDynamics& dyn) {
  if (route.path.empty()) return 0.0;
  const double s = route.path.project(ego.position()).s;
  const Vec2 local = ego.to_local(route.path.point_at(s + distance));
  const double ld2 = std::max(local.squaredNorm(), 1e-6);
  const double curvature = 2.0 * local.y() / ld2;
  const double delta = std::atan(dyn.wheelbase * curvature);
  return std::clamp(delta / dyn.max_steer, -1.0, 1.0);
}

ControlCommand acc_plan(const PlannerInput& input, PidState& pid, const AccConfig& cfg) {
  double target = cfg.max_speed;
  bool emergency = false;
  for (const Detection& d : input.detections) {
    if (!d.detected || d.cls != ActorClass::vehicle) continue;
    if (d.position.x() <= 0.0) continue;
    if (input.route && !input.route->path.empty()) {
      const Vec2 world = input.ego_pose.to_world(d.position);
      if (std::abs(input.route->path.project(world).lateral) >= 0.5 * input.lane_width) continue;
    } else if (std::abs(d.position.y()) >= 0.5 * input.lane_width) {
      continue;
    }
    const double gap = d.position.x() - 0.5 * (input.ego_extent.length + d.extent.length);
    if (gap > cfg.lookahead) continue;
    if (gap < cfg.emergency_gap) {
      emergency = true;
      continue;
    }
    // Tracks without a confirmed velocity are not yet usable for speed matching.
    if (!d.velocity) continue;
    const double v_obj = std::max(d.velocity->x(), 0.0);
    if (v_obj >= cfg.max_speed) continue;
    target = std::min(target, v_obj + cfg.gap_gain * std::max(gap - cfg.standoff, 0.0));
  }
  ControlCommand cmd = pid_control(target, input.ego_speed, pid, cfg.pid, input.dt);
  if (emergency) cmd = {0.0, 1.0, 0.0};
  cmd.steer = input.route ? pure_pursuit_steer(input.ego_pose, *input.route, cfg.pursuit_distance) : 0.0;
  return cmd;
}

ControlCommand basic_agent_plan(const PlannerInput& input, PidState& pid, const BasicAgentConfig& cfg) {
  if (!input.route || input.route->path.empty()) throw std::invalid_argument("basic_agent_plan: route required");
  const Polyline& path = input.route->path;
  const double s_ego = path.project(input.ego_pose.position()).s;
  if (s_ego >= path.length() - cfg.route_end_margin) return {0.0, 1.0, 0.0};

  const double rect_length = std::min(cfg.lookahead, cfg.brake_distance + cfg.brake_headway * input.ego_speed);
  bool hazard = false;
  for (const Detection& d : input.detections) {
    if (!d.detected) continue;
    if (d.cls == ActorClass::pedestrian) {
      if (d.position.x() > 0.0 && d.position.norm() < cfg.pedestrian_radius) hazard = true;
      continue;
    }
    for (const Vec2& corner : d.box().corners()) {
      const auto proj = path.project(input.ego_pose.to_world(corner));
      const double ahead = proj.s - s_ego;
      if (ahead >= 0.0 && ahead <= rect_length && std::abs(proj.lateral) < 0.5 * input.lane_width) {
        hazard = true;
        break;
      }
    }
  }

  double target = cfg.target_speed;
  for (const Vec2& j : input.route->junctions)
    if ((input.ego_pose.position() - j).norm() < cfg.junction_radius) target = std::min(target, cfg.junction_speed);

  ControlCommand cmd = pid_control(target, input.ego_speed, pid, cfg.pid, input.dt);
  if (hazard) cmd = {0.0, 1.0, 0.0};
  cmd.steer = pure_pursuit_steer(input.ego_pose, *input.route, cfg.pursuit_distance);
  return cmd;
}

}  // namespace pemsim
