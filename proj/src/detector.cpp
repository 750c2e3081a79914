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

#include "pemsim/detector.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace pemsim {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void DetectorProfile::validate() const {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("detector profile: sigma0 must be positive");
  if (sigma1 < 0.0) throw std::invalid_argument("detector profile: sigma1 must be non-negative");
  if (!(kalman.measurement_std > 0.0) || kalman.accel_psd < 0.0 || !(kalman.initial_velocity_std > 0.0))
    throw std::invalid_argument("detector profile: invalid Kalman noise");
  if (false_positive_rate < 0.0 || latency_pad_ms < 0.0)
    throw std::invalid_argument("detector profile: rates must be non-negative");
}

double DetectorProfile::detection_probability(double distance, double occlusion) const {
  return logistic(intercept + coef_distance * distance + coef_occlusion * occlusion +
                  coef_distance_occlusion * distance * occlusion);
}

std::vector<Detection> detect(std::span<const SalientVector> salients, const DetectorProfile& profile,
                              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Detection> out;
  out.reserve(salients.size());
  for (const auto& s : salients) {
    // Every actor consumes the same number of draws so streams stay aligned across outcomes.
    const double u = unit(rng);
    const double nx = normal(rng);
    const double ny = normal(rng);
    Detection d;
    d.actor_id = s.actor_id;
    d.cls = s.cls;
    d.extent = s.extent;
    d.yaw = s.rel_yaw;
    d.detected = u < profile.detection_probability(s.distance, s.occlusion);
    if (d.detected) {
      const double sigma = profile.position_sigma(s.distance);
      d.position = s.rel_position + sigma * Vec2(nx, ny);
    }
    out.push_back(d);
  }
  if (profile.false_positive_rate > 0.0) {
    std::poisson_distribution<int> count(profile.false_positive_rate);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      Detection fp;
      fp.detected = true;
      fp.position = Vec2(5.0 + 45.0 * unit(rng), -10.0 + 20.0 * unit(rng));
      out.push_back(fp);
    }
  }
  if (profile.latency_pad_ms > 0.0)
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(profile.latency_pad_ms));
  return out;
}

// ---------------------------------------------------------------------------
// Kalman filter

namespace {

void require_psd(const Eigen::Matrix4d& p) {
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  if (!p.allFinite() || (p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("kalman: covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(p, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
    throw std::invalid_argument("kalman: covariance is not positive semi-definite");
}

}  // namespace

KalmanTrack kalman_init(int actor_id, const Vec2& position, double time, const KalmanNoise& noise) {
  KalmanTrack t;
  t.actor_id = actor_id;
  t.mean << position.x(), position.y(), 0.0, 0.0;
  const double r2 = noise.measurement_std * noise.measurement_std;
  const double v2 = noise.initial_velocity_std * noise.initial_velocity_std;
  t.covariance = Eigen::Vector4d(r2, r2, v2, v2).asDiagonal();
  t.last_update_time = time;
  return t;
}

KalmanTrack kalman_predict(const KalmanTrack& track, double dt, const KalmanNoise& noise) {
  if (dt < 0.0) throw std::invalid_argument("kalman_predict: dt must be non-negative");
  require_psd(track.covariance);
  if (dt == 0.0) return track;
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  const double q = noise.accel_psd;
  const double a = q * dt * dt * dt / 3.0;
  const double b = q * dt * dt / 2.0;
  const double c = q * dt;
  Eigen::Matrix4d qm;
  qm << a, 0, b, 0,
        0, a, 0, b,
        b, 0, c, 0,
        0, b, 0, c;
  KalmanTrack out = track;
  out.mean = f * track.mean;
  out.covariance = f * track.covariance * f.transpose() + qm;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.last_update_time = track.last_update_time + dt;
  return out;
}

KalmanTrack kalman_update(const KalmanTrack& track, const Vec2& measured, const Eigen::Matrix2d& noise_r) {
  require_psd(track.covariance);
  Eigen::LLT<Eigen::Matrix2d> r_check(noise_r);
  if (r_check.info() != Eigen::Success || (noise_r - noise_r.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("kalman_update: R must be symmetric positive definite");

  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix4d& p = track.covariance;
  const Eigen::Matrix2d s = h * p * h.transpose() + noise_r;
  const Eigen::Matrix<double, 4, 2> k = p * h.transpose() * s.inverse();
  KalmanTrack out = track;
  out.mean = track.mean + k * (measured - h * track.mean);
  // Joseph form keeps the covariance symmetric PSD.
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - k * h;
  out.covariance = ikh * p * ikh.transpose() + k * noise_r * k.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

// ---------------------------------------------------------------------------
// Tracker

std::vector<Detection> Tracker::process(std::vector<Detection> detections, const Pose2D& ego_pose, double time) {
  const double r2 = noise_.measurement_std * noise_.measurement_std;
  const Eigen::Matrix2d r = Eigen::Vector2d(r2, r2).asDiagonal();
  std::map<int, bool> seen;
  for (auto& d : detections) {
    if (!d.detected || d.actor_id < 0) continue;
    seen[d.actor_id] = true;
    const Vec2 world = ego_pose.to_world(d.position);
    auto it = tracks_.find(d.actor_id);
    if (it == tracks_.end()) {
      it = tracks_.emplace(d.actor_id, Entry{kalman_init(d.actor_id, world, time, noise_), 1, 0}).first;
    } else {
      Entry& e = it->second;
      e.track = kalman_predict(e.track, time - e.track.last_update_time, noise_);
      e.track = kalman_update(e.track, world, r);
      ++e.hits;
      e.misses = 0;
    }
    // A velocity exists once the track has at least two measurements.
    if (it->second.hits >= 2) d.velocity = rotate(it->second.track.mean.tail<2>(), -ego_pose.yaw);
  }
  for (auto it = tracks_.begin(); it != tracks_.end();) {
    if (!seen.contains(it->first) && ++it->second.misses >= kDropAfterMisses) {
      it = tracks_.erase(it);
    } else {
      ++it;
    }
  }
  return detections;
}

const KalmanTrack* Tracker::track(int actor_id) const {
  const auto it = tracks_.find(actor_id);
  return it == tracks_.end() ? nullptr : &it->second.track;
}

std::vector<std::vector<Detection>> track_and_attach_velocity(const std::vector<std::vector<Detection>>& frames,
                                                              std::span<const Pose2D> ego_poses, double dt,
                                                              const KalmanNoise& noise) {
  if (ego_poses.size() != frames.size())
    throw std::invalid_argument("track_and_attach_velocity: one ego pose per frame required");
  Tracker tracker(noise);
  std::vector<std::vector<Detection>> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    out.push_back(tracker.process(frames[i], ego_poses[i], static_cast<double>(i) * dt));
  return out;
}

}  // namespace pemsim
