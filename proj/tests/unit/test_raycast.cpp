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

#include <random>

#include "oracles.hpp"
#include "pemsim/raycast.hpp"

using namespace pemsim;
using doctest::Approx;

namespace {

WorldState ego_only() {
  WorldState w;
  ActorState ego;
  ego.id = 0;
  ego.is_ego = true;
  w.actors.push_back(ego);
  return w;
}

ActorState car(int id, double x, double y, double yaw = 0.0) {
  ActorState a;
  a.id = id;
  a.pose = {x, y, yaw};
  return a;
}

}  // namespace

TEST_CASE("ray rectangle intersection") {
  const OrientedBox box{{10.0, 0.0}, 2.0, 2.0, 0.0};
  CHECK(*ray_rect_intersect({0.0, 0.0}, {1.0, 0.0}, box) == Approx(9.0));
  CHECK_FALSE(ray_rect_intersect({0.0, 0.0}, {-1.0, 0.0}, box));
  CHECK_FALSE(ray_rect_intersect({0.0, 0.0}, {0.0, 1.0}, box));
  CHECK(*ray_rect_intersect({10.0, 0.0}, {0.0, 1.0}, box) == 0.0);
  const Vec2 d = Vec2(1.0, 1.0).normalized();
  CHECK(*ray_rect_intersect({0.0, 0.0}, d, {{5.0, 5.0}, 2.0, 2.0, 0.3}) ==
        Approx(*oracle::ray_box({0.0, 0.0}, d, {{5.0, 5.0}, 2.0, 2.0, 0.3})));
}

TEST_CASE("isolated actor is unoccluded, a shadowed one fully occluded") {
  WorldState w = ego_only();
  w.actors.push_back(car(1, 20.0, 0.0));
  RayFanConfig cfg;
  auto occ = occlusion_fractions(w, cfg);
  CHECK(occ.at(1) == 0.0);
  // A wide wall in front hides the second car completely.
  ActorState wall = car(2, 10.0, 0.0, std::numbers::pi / 2.0);
  wall.extent = {20.0, 1.0};
  w.actors.push_back(wall);
  occ = occlusion_fractions(w, cfg);
  CHECK(occ.at(1) == 1.0);
  CHECK(occ.at(2) == 0.0);
}

TEST_CASE("actor beyond range counts as fully occluded") {
  WorldState w = ego_only();
  w.actors.push_back(car(1, 150.0, 0.0));
  CHECK(occlusion_fractions(w, RayFanConfig{}).at(1) == 1.0);
}

TEST_CASE("ray fan occlusion agrees with a dense oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-30.0, 30.0), yaw(-3.14, 3.14);
  RayFanConfig cfg;
  cfg.ray_count = 3600;
  cfg.sensor_offset = {0.0, 0.0, 0.0};
  int scenes = 0;
  while (scenes < 5) {
    WorldState w = ego_only();
    for (int id = 1; id <= 3; ++id) w.actors.push_back(car(id, pos(rng), pos(rng), yaw(rng)));
    bool clash = false;
    for (std::size_t i = 0; i < w.actors.size(); ++i)
      for (std::size_t j = i + 1; j < w.actors.size(); ++j) clash |= boxes_overlap(w.actors[i].box(), w.actors[j].box());
    if (clash) continue;
    ++scenes;
    const auto occ = occlusion_fractions(w, cfg);
    const auto ref = oracle::dense_occlusion(w.actors, {0.0, 0.0}, 20000, cfg.max_range);
    for (int id = 1; id <= 3; ++id) CHECK(std::abs(occ.at(id) - ref[static_cast<std::size_t>(id)]) < 0.02);
  }
}

TEST_CASE("ray fan config validation") {
  RayFanConfig cfg;
  cfg.ray_count = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
