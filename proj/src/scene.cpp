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

#include "pemsim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pemsim {

std::string to_string(ActorClass cls) {
  return cls == ActorClass::vehicle ? "vehicle" : "pedestrian";
}

ActorClass actor_class_from_string(const std::string& name) {
  if (name == "vehicle") return ActorClass::vehicle;
  if (name == "pedestrian") return ActorClass::pedestrian;
  throw std::invalid_argument("unknown actor class: " + name);
}

// ---------------------------------------------------------------------------
// ActorScript

double ActorScript::arc_length(double t) const {
  double s = start_s;
  for (std::size_t i = 0; i < speed_profile.size(); ++i) {
    const double begin = speed_profile[i].start_time;
    if (t <= begin) break;
    const double end = i + 1 < speed_profile.size() ? speed_profile[i + 1].start_time : t;
    s += speed_profile[i].speed * (std::min(t, end) - begin);
  }
  return s;
}

double ActorScript::path_speed(double t) const {
  double v = 0.0;
  for (const auto& seg : speed_profile) {
    if (seg.start_time <= t) v = seg.speed;
  }
  return v;
}

double ActorScript::lateral_offset(double t) const {
  if (!lateral_shift) return 0.0;
  const double u = (t - lateral_shift->start_time) / lateral_shift->duration;
  return lateral_shift->offset * std::clamp(u, 0.0, 1.0);
}

double ActorScript::lateral_rate(double t) const {
  if (!lateral_shift) return 0.0;
  const double u = (t - lateral_shift->start_time) / lateral_shift->duration;
  return (u >= 0.0 && u < 1.0) ? lateral_shift->offset / lateral_shift->duration : 0.0;
}

namespace {

Pose2D script_pose(const ActorScript& script, double t) {
  const double s = script.arc_length(t);
  const Vec2 tangent = script.path.tangent_at(s);
  const Vec2 normal(-tangent.y(), tangent.x());
  const Vec2 p = script.path.point_at(s) + script.lateral_offset(t) * normal;
  double yaw = std::atan2(tangent.y(), tangent.x());
  const double v = script.path_speed(t);
  const double lat = script.lateral_rate(t);
  if (v > 0.0 || lat != 0.0) yaw += std::atan2(lat, v);
  return {p.x(), p.y(), normalize_angle(yaw)};
}

}  // namespace

ActorScript::Sample ActorScript::sample(double t) const {
  Sample out;
  out.pose = script_pose(*this, t);
  out.speed = std::hypot(path_speed(t), lateral_rate(t));
  constexpr double h = 1e-3;
  const double t0 = std::max(0.0, t - h);
  const double t1 = t + h;
  out.angular_velocity = normalize_angle(script_pose(*this, t1).yaw - script_pose(*this, t0).yaw) / (t1 - t0);
  return out;
}

// ---------------------------------------------------------------------------
// ScenarioSpec

void ScenarioSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid scenario spec: ") + what);
  };
  require(timestep > 0.0, "timestep must be positive");
  require(duration >= timestep, "duration must be at least one timestep");
  require(lane_width > 0.0, "lane_width must be positive");
  require(ego_extent.length > 0.0 && ego_extent.width > 0.0, "ego extent must be positive");
  require(ego_dynamics.wheelbase > 0.0 && ego_dynamics.speed_max > 0.0, "ego dynamics must be positive");
  if (kind == ScenarioKind::acc) {
    require(acc.ego_speed >= 0.0 && acc.lead_speed >= 0.0, "speeds must be non-negative");
    require(acc.lead_gap > 0.0, "lead_gap must be positive");
    require(acc.parked_distance > 0.0, "parked_distance must be positive");
    require(acc.cut_out_time >= 0.0 && acc.cut_out_duration > 0.0, "cut-out timing must be positive");
    require(acc.road_length > acc.parked_distance, "road_length must extend past the parked car");
  } else {
    require(urban.num_vehicles >= 0 && urban.num_pedestrians >= 0, "actor counts must be non-negative");
    require(urban.road_length > 60.0, "road_length must exceed 60 m");
    require(urban.ego_speed >= 0.0, "ego_speed must be non-negative");
    require(urban.parked_fraction >= 0.0 && urban.parked_fraction <= 1.0, "parked_fraction must be in [0,1]");
  }
}

// ---------------------------------------------------------------------------
// WorldState

const ActorState& WorldState::ego() const {
  for (const auto& a : actors)
    if (a.is_ego) return a;
  throw std::logic_error("world has no ego actor");
}

ActorState& WorldState::ego() {
  for (auto& a : actors)
    if (a.is_ego) return a;
  throw std::logic_error("world has no ego actor");
}

const ActorState* WorldState::find(int id) const {
  for (const auto& a : actors)
    if (a.id == id) return &a;
  return nullptr;
}

namespace {

ActorState scripted_actor(int id, ActorClass cls, Extent extent, const ActorScript& script, double t) {
  const auto sample = script.sample(t);
  ActorState a;
  a.id = id;
  a.cls = cls;
  a.pose = sample.pose;
  a.speed = sample.speed;
  a.angular_velocity = sample.angular_velocity;
  a.extent = extent;
  return a;
}

void require_no_overlap(const std::vector<ActorState>& actors) {
  for (std::size_t i = 0; i < actors.size(); ++i)
    for (std::size_t j = i + 1; j < actors.size(); ++j)
      if (boxes_overlap(actors[i].box(), actors[j].box()))
        throw std::invalid_argument("invalid scenario spec: actors " + std::to_string(actors[i].id) + " and " +
                                    std::to_string(actors[j].id) + " overlap initially");
}

ActorState make_ego(const ScenarioSpec& spec, const Pose2D& pose, double speed) {
  ActorState ego;
  ego.id = 0;
  ego.cls = ActorClass::vehicle;
  ego.pose = pose;
  ego.speed = speed;
  ego.extent = spec.ego_extent;
  ego.is_ego = true;
  return ego;
}

}  // namespace

WorldState build_acc_scenario(const ScenarioSpec& spec) {
  if (spec.kind != ScenarioKind::acc) throw std::invalid_argument("build_acc_scenario needs kind = acc");
  spec.validate();
  const auto& p = spec.acc;
  constexpr double kBehind = 50.0;

  WorldState world;
  world.ego_dynamics = spec.ego_dynamics;
  const Polyline ego_lane({{-kBehind, 0.0}, {p.road_length, 0.0}});
  world.lanes.push_back({0, ego_lane, spec.lane_width});
  world.lanes.push_back({1, Polyline({{-kBehind, spec.lane_width}, {p.road_length, spec.lane_width}}), spec.lane_width});
  world.ego_route = {ego_lane, {}};
  world.actors.push_back(make_ego(spec, {0.0, 0.0, 0.0}, p.ego_speed));

  auto scripts = std::make_shared<std::map<int, ActorScript>>();

  ActorScript lead;
  lead.path = ego_lane;
  lead.start_s = kBehind + p.lead_gap;
  lead.speed_profile = {{0.0, p.lead_speed}};
  lead.lateral_shift = LateralShift{p.cut_out_time, p.cut_out_duration, spec.lane_width};
  (*scripts)[1] = lead;

  ActorScript parked;
  parked.path = ego_lane;
  parked.start_s = kBehind + p.parked_distance;
  parked.speed_profile = {{0.0, 0.0}};
  (*scripts)[2] = parked;

  world.actors.push_back(scripted_actor(1, ActorClass::vehicle, Extent{}, lead, 0.0));
  world.actors.push_back(scripted_actor(2, ActorClass::vehicle, Extent{}, parked, 0.0));
  world.scripts = std::move(scripts);
  require_no_overlap(world.actors);
  return world;
}

WorldState build_urban_scenario(const ScenarioSpec& spec, std::mt19937_64& rng) {
  if (spec.kind != ScenarioKind::urban_routes)
    throw std::invalid_argument("build_urban_scenario needs kind = urban_routes");
  spec.validate();
  const auto& p = spec.urban;
  const double half = 0.5 * p.road_length;
  const double w = spec.lane_width;

  WorldState world;
  world.ego_dynamics = spec.ego_dynamics;
  // A four-way crossing: two lanes each way east-west, one each way north-south.
  world.lanes = {
      {0, Polyline({{-half, -0.5 * w}, {half, -0.5 * w}}), w},
      {1, Polyline({{-half, -1.5 * w}, {half, -1.5 * w}}), w},
      {2, Polyline({{half, 0.5 * w}, {-half, 0.5 * w}}), w},
      {3, Polyline({{half, 1.5 * w}, {-half, 1.5 * w}}), w},
      {4, Polyline({{0.5 * w, -half}, {0.5 * w, half}}), w},
      {5, Polyline({{-0.5 * w, half}, {-0.5 * w, -half}}), w},
  };
  world.ego_route = {world.lanes[0].centreline, {Vec2(0.0, 0.0)}};
  const double ego_s = 20.0;
  const Vec2 ego_p = world.ego_route.path.point_at(ego_s);
  world.actors.push_back(make_ego(spec, {ego_p.x(), ego_p.y(), 0.0}, p.ego_speed));

  auto scripts = std::make_shared<std::map<int, ActorScript>>();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Keep a clear zone around the ego start so the first frames are collision free.
  OrientedBox ego_clear = world.actors.front().box();
  ego_clear.length += 30.0;
  ego_clear.width += 2.0;

  auto try_place = [&](int id, ActorClass cls, Extent extent, ActorScript script) {
    ActorState actor = scripted_actor(id, cls, extent, script, 0.0);
    OrientedBox padded = actor.box();
    padded.length += 2.0;
    padded.width += 0.4;
    if (boxes_overlap(padded, ego_clear)) return false;
    for (const auto& other : world.actors)
      if (boxes_overlap(padded, other.box())) return false;
    world.actors.push_back(actor);
    (*scripts)[id] = std::move(script);
    return true;
  };

  int next_id = 1;
  constexpr int kMaxAttempts = 1000;
  for (int i = 0; i < p.num_vehicles; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const auto lane = static_cast<std::size_t>(unit(rng) * static_cast<double>(world.lanes.size())) %
                        world.lanes.size();
      ActorScript script;
      script.path = world.lanes[lane].centreline;
      script.start_s = uniform(0.0, p.road_length);
      const bool parked = unit(rng) < p.parked_fraction;
      script.speed_profile = {{0.0, parked ? 0.0 : uniform(3.0, 12.0)}};
      const Extent extent{uniform(3.8, 5.2), uniform(1.7, 2.1)};
      placed = try_place(next_id, ActorClass::vehicle, extent, std::move(script));
    }
    if (!placed) throw std::runtime_error("could not place background vehicle; road too crowded");
    ++next_id;
  }

  const double walk_y = 2.0 * w + 1.5;
  for (int i = 0; i < p.num_pedestrians; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      ActorScript script;
      const double r = unit(rng);
      if (r < 0.8) {
        // Sidewalk walkers.
        const double y = (r < 0.4 ? -walk_y : walk_y);
        const bool east = unit(rng) < 0.5;
        script.path = east ? Polyline({{-half, y}, {half, y}}) : Polyline({{half, y}, {-half, y}});
        script.start_s = uniform(0.0, p.road_length);
      } else {
        // Crossing the east-west road away from the junction.
        const double x = uniform(-half + 30.0, half - 30.0);
        script.path = Polyline({{x, -walk_y}, {x, walk_y}});
        script.start_s = uniform(-20.0, 0.0);
      }
      script.speed_profile = {{0.0, uniform(0.5, 1.8)}};
      const double size = uniform(0.5, 0.8);
      placed = try_place(next_id, ActorClass::pedestrian, Extent{size, size}, std::move(script));
    }
    if (!placed) throw std::runtime_error("could not place pedestrian");
    ++next_id;
  }

  world.scripts = std::move(scripts);
  return world;
}

WorldState build_scenario(const ScenarioSpec& spec) {
  if (spec.kind == ScenarioKind::acc) return build_acc_scenario(spec);
  std::mt19937_64 rng(spec.seed);
  return build_urban_scenario(spec, rng);
}

// ---------------------------------------------------------------------------
// Stepping

WorldState step_world(const WorldState& state, const ControlCommand& control, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_world: dt must be positive");
  WorldState next = state;
  next.time = state.time + dt;
  const EgoDynamics& dyn = state.ego_dynamics;

  for (auto& actor : next.actors) {
    if (actor.is_ego) {
      const double throttle = std::clamp(control.throttle, 0.0, 1.0);
      const double brake = std::clamp(control.brake, 0.0, 1.0);
      const double accel = dyn.max_accel * throttle - dyn.max_decel * brake;
      const double v0 = actor.speed;
      const double v1 = std::clamp(v0 + accel * dt, 0.0, dyn.speed_max);
      const double steer_target = std::clamp(control.steer, -1.0, 1.0) * dyn.max_steer;
      const double max_delta = dyn.max_steer_rate * dt;
      next.ego_steer = state.ego_steer + std::clamp(steer_target - state.ego_steer, -max_delta, max_delta);

      const double v_avg = 0.5 * (v0 + v1);
      const double yaw_rate = v_avg * std::tan(next.ego_steer) / dyn.wheelbase;
      const double yaw0 = actor.pose.yaw;
      if (std::abs(yaw_rate) < 1e-12) {
        actor.pose.x += v_avg * std::cos(yaw0) * dt;
        actor.pose.y += v_avg * std::sin(yaw0) * dt;
      } else {
        const double yaw1 = yaw0 + yaw_rate * dt;
        const double radius = v_avg / yaw_rate;
        actor.pose.x += radius * (std::sin(yaw1) - std::sin(yaw0));
        actor.pose.y += radius * (std::cos(yaw0) - std::cos(yaw1));
        actor.pose.yaw = normalize_angle(yaw1);
      }
      actor.speed = v1;
      actor.angular_velocity = yaw_rate;
    } else if (state.scripts) {
      const auto it = state.scripts->find(actor.id);
      if (it == state.scripts->end()) continue;
      const auto sample = it->second.sample(next.time);
      actor.pose = sample.pose;
      actor.speed = sample.speed;
      actor.angular_velocity = sample.angular_velocity;
    }
  }

  next.collisions.clear();
  next.collision_onsets.clear();
  ActorState& ego = next.ego();
  const OrientedBox ego_box = ego.box();
  for (const auto& actor : next.actors) {
    if (actor.is_ego || !boxes_overlap(ego_box, actor.box())) continue;
    next.collisions.push_back(actor.id);
    if (std::find(state.collisions.begin(), state.collisions.end(), actor.id) == state.collisions.end())
      next.collision_onsets.push_back(actor.id);
  }
  // A crash stops the ego.
  if (!next.collision_onsets.empty()) ego.speed = 0.0;
  return next;
}

// ---------------------------------------------------------------------------
// Salient variables

Vec2 SalientVector::velocity() const { return speed * Vec2(std::cos(rel_yaw), std::sin(rel_yaw)); }

std::vector<SalientVector> extract_salient(const WorldState& state, const std::map<int, double>& occlusions) {
  const ActorState& ego = state.ego();
  std::vector<SalientVector> out;
  out.reserve(state.actors.size());
  for (const auto& actor : state.actors) {
    if (actor.is_ego) continue;
    const auto occ = occlusions.find(actor.id);
    if (occ == occlusions.end())
      throw std::invalid_argument("extract_salient: missing occlusion for actor " + std::to_string(actor.id));
    const Pose2D rel = ego.pose.relative(actor.pose);
    SalientVector s;
    s.actor_id = actor.id;
    s.cls = actor.cls;
    s.rel_position = rel.position();
    s.rel_yaw = rel.yaw;
    s.speed = actor.speed;
    s.angular_velocity = actor.angular_velocity;
    s.extent = actor.extent;
    s.occlusion = std::clamp(occ->second, 0.0, 1.0);
    s.distance = s.rel_position.norm();
    s.class_onehot[static_cast<int>(actor.cls)] = 1.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace pemsim
