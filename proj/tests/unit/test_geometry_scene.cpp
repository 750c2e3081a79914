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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pemsim/geometry.hpp"
#include "pemsim/scene.hpp"

using namespace pemsim;
using doctest::Approx;

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(std::numbers::pi) == Approx(std::numbers::pi));
  CHECK(normalize_angle(-std::numbers::pi) == Approx(std::numbers::pi));
  CHECK(normalize_angle(3.0 * std::numbers::pi / 2.0) == Approx(-std::numbers::pi / 2.0));
  CHECK(normalize_angle(0.25) == Approx(0.25));
}

TEST_CASE("pose relative and compose are inverse") {
  const Pose2D a{1.0, -2.0, 0.7};
  const Pose2D b{4.0, 3.0, -2.5};
  const Pose2D rel = a.relative(b);
  const Pose2D back = a.compose(rel);
  CHECK(back.x == Approx(b.x));
  CHECK(back.y == Approx(b.y));
  CHECK(back.yaw == Approx(b.yaw));
  const Vec2 p(5.0, -1.0);
  CHECK((a.to_world(a.to_local(p)) - p).norm() < 1e-12);
}

TEST_CASE("oriented box corners and containment") {
  const OrientedBox box{{0.0, 0.0}, 4.0, 2.0, std::numbers::pi / 2.0};
  const auto c = box.corners();
  CHECK(c[0].x() == Approx(-1.0));
  CHECK(c[0].y() == Approx(2.0));
  CHECK(polygon_area(c) == Approx(8.0));
  CHECK(box.contains({0.9, 1.9}));
  CHECK_FALSE(box.contains({1.1, 0.0}));
}

TEST_CASE("separating axis overlap") {
  const OrientedBox a{{0.0, 0.0}, 2.0, 2.0, 0.0};
  CHECK(boxes_overlap(a, {{1.9, 0.0}, 2.0, 2.0, 0.0}));
  CHECK(boxes_overlap(a, {{2.0, 0.0}, 2.0, 2.0, 0.0}));  // touching
  CHECK_FALSE(boxes_overlap(a, {{2.1, 0.0}, 2.0, 2.0, 0.0}));
  // A diamond whose tip is inside the axis-aligned square's bounding box but not the square itself.
  CHECK_FALSE(boxes_overlap(a, {{2.5, 2.5}, 2.0, 2.0, std::numbers::pi / 4.0}));
  CHECK(boxes_overlap(a, {{2.3, 0.0}, 2.0, 2.0, std::numbers::pi / 4.0}));
}

TEST_CASE("polyline arc length, projection and extrapolation") {
  const Polyline line({{0.0, 0.0}, {10.0, 0.0}, {10.0, 10.0}});
  CHECK(line.length() == Approx(20.0));
  CHECK((line.point_at(15.0) - Vec2(10.0, 5.0)).norm() < 1e-12);
  CHECK((line.point_at(-2.0) - Vec2(-2.0, 0.0)).norm() < 1e-12);
  const auto p = line.project({5.0, 1.0});
  CHECK(p.s == Approx(5.0));
  CHECK(p.lateral == Approx(1.0));
  const auto q = line.project({11.0, 5.0});
  CHECK(q.lateral == Approx(-1.0));
  CHECK(line.project({10.0, 14.0}).s == Approx(24.0));
  CHECK_THROWS_AS(Polyline({{0.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("scenario spec validation") {
  ScenarioSpec s;
  CHECK_NOTHROW(s.validate());
  s.timestep = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("ACC scenario layout") {
  ScenarioSpec spec;
  const WorldState w = build_acc_scenario(spec);
  REQUIRE(w.actors.size() == 3);
  CHECK(w.ego().id == 0);
  const ActorState* lead = w.find(1);
  const ActorState* parked = w.find(2);
  REQUIRE(lead);
  REQUIRE(parked);
  CHECK(lead->pose.x - w.ego().pose.x == Approx(spec.acc.lead_gap));
  CHECK(parked->pose.x - w.ego().pose.x == Approx(spec.acc.parked_distance));
  CHECK(parked->speed == 0.0);
}

TEST_CASE("scripted cut-out moves the lead one lane left") {
  ScenarioSpec spec;
  WorldState w = build_acc_scenario(spec);
  const double y0 = w.find(1)->pose.y;
  const ControlCommand hold{0.0, 0.0, 0.0};
  while (w.time < spec.acc.cut_out_time + spec.acc.cut_out_duration + 1.0) w = step_world(w, hold, 0.05);
  CHECK(w.find(1)->pose.y - y0 == Approx(spec.lane_width).epsilon(1e-6));
  CHECK(w.find(2)->pose.x == Approx(spec.acc.parked_distance));
}

TEST_CASE("ego kinematics: straight coast and full brake") {
  ScenarioSpec spec;
  WorldState w = build_acc_scenario(spec);
  const double x0 = w.ego().pose.x;
  const double v0 = w.ego().speed;
  w = step_world(w, {0.0, 0.0, 0.0}, 0.1);
  CHECK(w.ego().pose.x - x0 == Approx(v0 * 0.1));
  const double decel = spec.ego_dynamics.max_decel;
  w = step_world(w, {0.0, 1.0, 0.0}, 0.1);
  CHECK(w.ego().speed == Approx(v0 - decel * 0.1));
  for (int k = 0; k < 100; ++k) w = step_world(w, {0.0, 1.0, 0.0}, 0.1);
  CHECK(w.ego().speed == 0.0);
}

TEST_CASE("constant steer traces a circle of the bicycle radius") {
  ScenarioSpec spec;
  WorldState w = build_acc_scenario(spec);
  w.actors.resize(1);  // ego only
  w.ego().speed = 5.0;
  w.ego_steer = spec.ego_dynamics.max_steer;
  const double radius = spec.ego_dynamics.wheelbase / std::tan(spec.ego_dynamics.max_steer);
  const Vec2 centre = w.ego().pose.position() + radius * Vec2(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    w = step_world(w, {0.0, 0.0, 1.0}, 0.05);
    CHECK((w.ego().pose.position() - centre).norm() == Approx(radius).epsilon(1e-9));
  }
}

TEST_CASE("collision onset is recorded once and stops the ego") {
  ScenarioSpec spec;
  spec.acc.lead_gap = 6.0;
  spec.acc.lead_speed = 0.0;
  WorldState w = build_acc_scenario(spec);
  int onsets = 0;
  for (int k = 0; k < 40; ++k) {
    w = step_world(w, {1.0, 0.0, 0.0}, 0.05);
    onsets += static_cast<int>(w.collision_onsets.size());
    if (!w.collision_onsets.empty()) CHECK(w.ego().speed == 0.0);
  }
  CHECK(onsets == 1);
  CHECK(w.collisions == std::vector<int>{1});
}

TEST_CASE("urban scenario is deterministic in its seed and collision free at start") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::urban_routes;
  spec.urban.num_pedestrians = 4;
  spec.seed = 7;
  const WorldState a = build_scenario(spec);
  const WorldState b = build_scenario(spec);
  REQUIRE(a.actors.size() == b.actors.size());
  CHECK(a.actors.size() == 1 + 20 + 4);
  for (std::size_t i = 0; i < a.actors.size(); ++i) {
    CHECK(a.actors[i].pose.x == b.actors[i].pose.x);
    CHECK(a.actors[i].pose.y == b.actors[i].pose.y);
  }
  for (std::size_t i = 0; i < a.actors.size(); ++i)
    for (std::size_t j = i + 1; j < a.actors.size(); ++j) CHECK_FALSE(boxes_overlap(a.actors[i].box(), a.actors[j].box()));
  spec.seed = 8;
  const WorldState c = build_scenario(spec);
  bool differs = false;
  for (std::size_t i = 1; i < a.actors.size(); ++i) differs |= a.actors[i].pose.x != c.actors[i].pose.x;
  CHECK(differs);
}

TEST_CASE("salient vector is expressed in the ego frame") {
  ScenarioSpec spec;
  WorldState w = build_acc_scenario(spec);
  w.ego().pose.yaw = std::numbers::pi / 2.0;
  std::map<int, double> occ{{1, 0.25}, {2, 1.0}};
  const auto s = extract_salient(w, occ);
  REQUIRE(s.size() == 2);
  CHECK(s[0].actor_id == 1);
  CHECK(s[0].rel_position.x() == Approx(0.0).epsilon(1e-12));
  CHECK(s[0].rel_position.y() == Approx(-spec.acc.lead_gap));
  CHECK(s[0].rel_yaw == Approx(-std::numbers::pi / 2.0));
  CHECK(s[0].occlusion == 0.25);
  CHECK(s[0].class_onehot[0] == 1.0);
  CHECK(s[0].class_onehot[1] == 0.0);
  CHECK(s[0].distance == Approx(spec.acc.lead_gap));
  CHECK((s[0].velocity() - Vec2(0.0, -spec.acc.lead_speed)).norm() < 1e-9);
  occ.erase(2);
  CHECK_THROWS_AS(extract_salient(w, occ), std::invalid_argument);
}
