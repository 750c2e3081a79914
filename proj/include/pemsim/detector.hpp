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
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pemsim/scene.hpp"

namespace pemsim {

/// Output of the backbone detector or of a surrogate, in the ego frame.
struct Detection {
  int actor_id = -1;  // ground-truth bookkeeping; -1 for false positives
  ActorClass cls = ActorClass::vehicle;
  bool detected = false;
  Vec2 position = Vec2::Zero();
  std::optional<Vec2> velocity;  // world velocity rotated into the ego frame
  Extent extent;
  double yaw = 0.0;

  OrientedBox box() const { return {position, extent.length, extent.width, yaw}; }
};

struct KalmanNoise {
  double accel_psd = 4.0;        // white-noise acceleration spectral density, m^2/s^3
  double measurement_std = 0.3;  // per axis, metres
  double initial_velocity_std = 10.0;
};

/// Synthetic stand-in for the expensive backbone detector.
struct DetectorProfile {
  // Detection logit = intercept + distance*d + occlusion*occ + distance_occlusion*d*occ.
  double intercept = 3.0;
  double coef_distance = -0.05;
  double coef_occlusion = -3.0;
  double coef_distance_occlusion = 0.0;
  double sigma0 = 0.2;  // per-axis positional noise at zero range
  double sigma1 = 0.005;
  KalmanNoise kalman;
  std::uint64_t seed = 0;
  double false_positive_rate = 0.0;  // expected false positives per frame
  double latency_pad_ms = 0.0;       // emulated backbone cost

  void validate() const;
  double detection_probability(double distance, double occlusion) const;
  double position_sigma(double distance) const { return sigma0 + sigma1 * distance; }
};

double logistic(double x);

/// One detection per salient actor (plus optional false positives). Velocities are left empty.
std::vector<Detection> detect(std::span<const SalientVector> salients, const DetectorProfile& profile,
                              std::mt19937_64& rng);

/// Constant-velocity Kalman track; state (x, y, vx, vy) in the world frame.
struct KalmanTrack {
  int actor_id = -1;
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  double last_update_time = 0.0;
};

KalmanTrack kalman_init(int actor_id, const Vec2& position, double time, const KalmanNoise& noise);
KalmanTrack kalman_predict(const KalmanTrack& track, double dt, const KalmanNoise& noise);
KalmanTrack kalman_update(const KalmanTrack& track, const Vec2& measured, const Eigen::Matrix2d& noise_r);

/// Per-run tracker that attaches Kalman velocities to detections.
class Tracker {
 public:
  static constexpr int kDropAfterMisses = 5;

  explicit Tracker(KalmanNoise noise = {}) : noise_(noise) {}

  /// `detections` are in the frame of `ego_pose`; returns them with velocity filled for confirmed tracks.
  std::vector<Detection> process(std::vector<Detection> detections, const Pose2D& ego_pose, double time);

  const KalmanTrack* track(int actor_id) const;

 private:
  struct Entry {
    KalmanTrack track;
    int hits = 0;
    int misses = 0;
  };
  KalmanNoise noise_;
  std::map<int, Entry> tracks_;
};

/// Batch form of Tracker over time-ordered frames at a fixed dt.
std::vector<std::vector<Detection>> track_and_attach_velocity(const std::vector<std::vector<Detection>>& frames,
                                                              std::span<const Pose2D> ego_poses, double dt,
                                                              const KalmanNoise& noise = {});

}  // namespace pemsim
