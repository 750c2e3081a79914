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

#include <map>
#include <optional>

#include "pemsim/geometry.hpp"
#include "pemsim/scene.hpp"

namespace pemsim {

struct RayFanConfig {
  int ray_count = 360;
  double fov = 2.0 * 3.14159265358979323846;  // full azimuthal span
  double max_range = 100.0;
  Pose2D sensor_offset{0.9, 0.0, 0.0};  // relative to the ego centre

  void validate() const;
};

/// Smallest non-negative distance at which the ray enters `rect` (0 when the origin is inside).
std::optional<double> ray_rect_intersect(const Vec2& origin, const Vec2& direction, const OrientedBox& rect);

/// Per-actor occlusion: 1 - (rays whose first hit is the actor) / (rays that would hit it alone).
/// Actors no ray can reach get 1.
std::map<int, double> occlusion_fractions(const WorldState& state, const RayFanConfig& cfg);

}  // namespace pemsim
