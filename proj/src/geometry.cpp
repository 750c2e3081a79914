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

#include "pemsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pemsim {

double normalize_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Vec2 Pose2D::heading() const { return {std::cos(yaw), std::sin(yaw)}; }

Vec2 Pose2D::to_world(const Vec2& local) const { return position() + rotate(local, yaw); }

Vec2 Pose2D::to_local(const Vec2& world) const { return rotate(world - position(), -yaw); }

Pose2D Pose2D::compose(const Pose2D& child) const {
  const Vec2 p = to_world(child.position());
  return {p.x(), p.y(), normalize_angle(yaw + child.yaw)};
}

Pose2D Pose2D::relative(const Pose2D& other) const {
  const Vec2 p = to_local(other.position());
  return {p.x(), p.y(), normalize_angle(other.yaw - yaw)};
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 f = rotate(Vec2(0.5 * length, 0.0), yaw);
  const Vec2 l = rotate(Vec2(0.0, 0.5 * width), yaw);
  return {centre + f + l, centre - f + l, centre - f - l, centre + f - l};
}

bool OrientedBox::contains(const Vec2& p) const {
  const Vec2 local = rotate(p - centre, -yaw);
  return std::abs(local.x()) <= 0.5 * length && std::abs(local.y()) <= 0.5 * width;
}

namespace {

// Projection interval of a box onto `axis`.
std::pair<double, double> project_box(const OrientedBox& box, const Vec2& axis) {
  const double c = box.centre.dot(axis);
  const Vec2 f = rotate(Vec2(1.0, 0.0), box.yaw);
  const Vec2 l = rotate(Vec2(0.0, 1.0), box.yaw);
  const double r = 0.5 * box.length * std::abs(f.dot(axis)) + 0.5 * box.width * std::abs(l.dot(axis));
  return {c - r, c + r};
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const std::array<Vec2, 4> axes = {rotate(Vec2(1.0, 0.0), a.yaw), rotate(Vec2(0.0, 1.0), a.yaw),
                                    rotate(Vec2(1.0, 0.0), b.yaw), rotate(Vec2(0.0, 1.0), b.yaw)};
  for (const Vec2& axis : axes) {
    const auto [a_lo, a_hi] = project_box(a, axis);
    const auto [b_lo, b_hi] = project_box(b, axis);
    if (a_hi < b_lo || b_hi < a_lo) return false;
  }
  return true;
}

double polygon_area(std::span<const Vec2> polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("polyline needs at least two points");
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double seg = (points_[i] - points_[i - 1]).norm();
    if (seg <= 0.0) throw std::invalid_argument("polyline has repeated points");
    cumulative_.push_back(cumulative_.back() + seg);
  }
}

std::size_t Polyline::segment_for(double s) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t idx = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return std::min(idx, points_.size() - 2);
}

Vec2 Polyline::point_at(double s) const {
  const std::size_t i = segment_for(s);
  const Vec2 dir = (points_[i + 1] - points_[i]).normalized();
  return points_[i] + dir * (s - cumulative_[i]);
}

Vec2 Polyline::tangent_at(double s) const {
  const std::size_t i = segment_for(s);
  return (points_[i + 1] - points_[i]).normalized();
}

Polyline::Projection Polyline::project(const Vec2& p) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Vec2 a = points_[i];
    const Vec2 d = points_[i + 1] - a;
    const double seg_len = cumulative_[i + 1] - cumulative_[i];
    double u = (p - a).dot(d) / (seg_len * seg_len);
    // The first and last segments extend to infinity so that points beyond the ends still project.
    if (i > 0) u = std::max(u, 0.0);
    if (i + 2 < points_.size()) u = std::min(u, 1.0);
    const Vec2 closest = a + u * d;
    const double dist = (p - closest).norm();
    if (dist < best.distance) {
      const Vec2 t = d / seg_len;
      const Vec2 r = p - closest;
      best.distance = dist;
      best.s = cumulative_[i] + u * seg_len;
      best.lateral = t.x() * r.y() - t.y() * r.x();
    }
  }
  return best;
}

}  // namespace pemsim
