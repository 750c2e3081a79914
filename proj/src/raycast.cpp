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

#include "pemsim/raycast.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pemsim {

void RayFanConfig::validate() const {
  if (ray_count < 1) throw std::invalid_argument("ray_count must be >= 1");
  if (!(fov > 0.0) || fov > 2.0 * std::numbers::pi + 1e-12) throw std::invalid_argument("fov must be in (0, 2pi]");
  if (!(max_range > 0.0)) throw std::invalid_argument("max_range must be positive");
}

std::optional<double> ray_rect_intersect(const Vec2& origin, const Vec2& direction, const OrientedBox& rect) {
  // Slab test in the rectangle's frame.
  const Vec2 o = rotate(origin - rect.centre, -rect.yaw);
  const Vec2 d = rotate(direction, -rect.yaw);
  const double half[2] = {0.5 * rect.length, 0.5 * rect.width};
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) {
      if (std::abs(o[axis]) > half[axis]) return std::nullopt;
      continue;
    }
    double t0 = (-half[axis] - o[axis]) / d[axis];
    double t1 = (half[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_exit < 0.0) return std::nullopt;
  return std::max(t_enter, 0.0);
}

std::map<int, double> occlusion_fractions(const WorldState& state, const RayFanConfig& cfg) {
  cfg.validate();
  const ActorState& ego = state.ego();
  const Pose2D sensor = ego.pose.compose(cfg.sensor_offset);
  const Vec2 origin = sensor.position();

  struct Target {
    int id;
    OrientedBox box;
    double reach;  // centre distance plus half diagonal; cheap reject
  };
  std::vector<Target> targets;
  for (const auto& a : state.actors) {
    if (a.is_ego) continue;
    const OrientedBox box = a.box();
    const double half_diag = 0.5 * std::hypot(box.length, box.width);
    targets.push_back({a.id, box, (box.centre - origin).norm() - half_diag});
  }

  std::vector<int> isolated(targets.size(), 0);
  std::vector<int> first(targets.size(), 0);
  const double step = cfg.fov / cfg.ray_count;
  const double start = sensor.yaw - 0.5 * cfg.fov;
  for (int r = 0; r < cfg.ray_count; ++r) {
    const double angle = start + (r + 0.5) * step;
    const Vec2 dir(std::cos(angle), std::sin(angle));
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = targets.size();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i].reach > cfg.max_range) continue;
      const auto hit = ray_rect_intersect(origin, dir, targets[i].box);
      if (!hit || *hit > cfg.max_range) continue;
      ++isolated[i];
      // Ties go to the lower actor id.
      if (*hit < best || (*hit == best && targets[i].id < targets[best_idx].id)) {
        best = *hit;
        best_idx = i;
      }
    }
    if (best_idx < targets.size()) ++first[best_idx];
  }

  std::map<int, double> out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    out[targets[i].id] =
        isolated[i] == 0 ? 1.0 : 1.0 - static_cast<double>(first[i]) / static_cast<double>(isolated[i]);
  }
  return out;
}

}  // namespace pemsim
