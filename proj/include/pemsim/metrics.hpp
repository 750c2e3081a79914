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

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pemsim/geometry.hpp"

namespace pemsim::metrics {

inline constexpr double kDefaultMaxRange = 50.0;

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

/// One actor-frame (or one false-positive detection) in an evaluation.
struct DetectionOutcome {
  bool predicted = false;          // detected by the model under evaluation
  bool ground_truth = true;        // false only for false-positive detections
  bool detector_detected = false;  // what the backbone detector did for this row
  double distance = 0.0;
};

enum class ReferenceMode { vs_gt, vs_detector };

struct ClassificationReport {
  ConfusionCounts counts;
  double precision = 1.0;  // 1 when nothing was predicted positive
  double recall = 1.0;     // 1 when the reference has no positives
  double accuracy = 0.0;
};

ClassificationReport classify(const ConfusionCounts& counts);
/// Rows beyond `max_range` are excluded. Throws on empty (post-cutoff) input.
ClassificationReport classification_metrics(std::span<const DetectionOutcome> rows, ReferenceMode mode,
                                             double max_range = kDefaultMaxRange);

struct PositionPair {
  Vec2 predicted = Vec2::Zero();
  Vec2 reference = Vec2::Zero();
  double distance = 0.0;
};

/// Mean squared Euclidean error over pairs within range. Throws when none remain.
double sp_mse(std::span<const PositionPair> pairs, double max_range = kDefaultMaxRange);

struct TrajectoryTrace {
  std::vector<double> t;
  std::vector<Vec2> position;
  std::vector<Vec2> velocity;
  std::vector<double> brake;
  std::vector<double> collision_times;

  void validate() const;
};

enum class TraceQuantity { position, velocity };

/// Left-Riemann time average of the Euclidean difference, after linear interpolation of both
/// traces onto the union of their timestamps inside the common time range.
double mean_eucl(const TrajectoryTrace& a, const TrajectoryTrace& b, TraceQuantity q);
/// Maximum Euclidean difference over the same union grid.
double max_eucl(const TrajectoryTrace& a, const TrajectoryTrace& b, TraceQuantity q);

struct BrakingSummary {
  double mba = 0.0;
  double tmba = 0.0;  // relative to the first timestamp; 0 when the run never brakes
  bool braked = false;
};

BrakingSummary mba_tmba(const TrajectoryTrace& trace);

struct CollisionCdf {
  std::vector<double> gaps;        // sorted
  std::vector<double> cumulative;  // (i + 1) / n
  double median = 0.0;
};

/// Pools the gaps between consecutive collisions of each run.
CollisionCdf collision_interval_cdf(std::span<const std::vector<double>> collision_times_per_run);

struct PklResult {
  double kde_estimate = 0.0;
  double jensen_bound = 0.0;
};

/// Reference planner outputs z_t and, per t, n planner outputs under resampled perception.
/// Gaussian-kernel estimate of -sum_t log p(z_t) and its Jensen upper bound.
PklResult pkl_from_samples(std::span<const Eigen::VectorXd> reference,
                           std::span<const std::vector<Eigen::VectorXd>> samples, double bandwidth);

/// `replan(t, rng)` returns one planner output for timestep t under a fresh perception sample.
PklResult pkl_bound(std::span<const Eigen::VectorXd> reference,
                    const std::function<Eigen::VectorXd(std::size_t, std::mt19937_64&)>& replan, int n,
                    double bandwidth, std::mt19937_64& rng);

/// Square table indexed by labels; values divided by the (norm_row, norm_col) entry, diagonal zeroed.
struct PairwiseTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
};

PairwiseTable normalized_pairwise_table(const PairwiseTable& table, const std::string& norm_row,
                                        const std::string& norm_col);

}  // namespace pemsim::metrics
