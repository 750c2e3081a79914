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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace pemsim {

using Vec2 = Eigen::Vector2d;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const;

  /// Maps a point expressed in this pose's frame into the parent frame.
  Vec2 to_world(const Vec2& local) const;
  /// Maps a parent-frame point into this pose's frame.
  Vec2 to_local(const Vec2& world) const;
  /// Composition: `child` given relative to this pose.
  Pose2D compose(const Pose2D& child) const;
  /// Expresses `other` relative to this pose.
  Pose2D relative(const Pose2D& other) const;
};

Vec2 rotate(const Vec2& v, double angle);

struct OrientedBox {
  Vec2 centre = Vec2::Zero();
  double length = 1.0;  // along yaw
  double width = 1.0;
  double yaw = 0.0;

  /// Counter-clockwise corners starting at front-left.
  std::array<Vec2, 4> corners() const;
  bool contains(const Vec2& p) const;
  double area() const { return length * width; }
};

/// Separating-axis overlap test; touching edges count as overlap.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

/// Signed area of a simple polygon (positive when counter-clockwise).
double polygon_area(std::span<const Vec2> polygon);

/// Arc-length parameterised polyline.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  bool empty() const { return points_.size() < 2; }

  /// Point at arc length s; extrapolates linearly past either end.
  Vec2 point_at(double s) const;
  /// Unit tangent at arc length s.
  Vec2 tangent_at(double s) const;

  struct Projection {
    double s = 0.0;        // arc length of the closest point
    double lateral = 0.0;  // signed offset, positive to the left of travel
    double distance = 0.0;
  };
  Projection project(const Vec2& p) const;

 private:
  std::size_t segment_for(double s) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

}  // namespace pemsim
