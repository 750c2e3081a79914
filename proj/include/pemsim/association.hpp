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

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pemsim/detector.hpp"
#include "pemsim/geometry.hpp"

namespace pemsim {

/// Exact intersection-over-union of two oriented rectangles.
double box_iou(const OrientedBox& a, const OrientedBox& b);

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, column), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

/// Minimum-cost assignment of min(n, m) pairs. Among equal-cost optima the one with the
/// smallest sum of (row + column) indices over matched pairs wins.
Assignment hungarian(const Eigen::MatrixXd& cost);

struct GroundTruthBox {
  OrientedBox box;
  ActorClass cls = ActorClass::vehicle;
};

/// Matches ground truth (rows) to detected entries of `detections` (columns index into the
/// span). Pairs with IoU <= iou_gate or differing class are demoted to unmatched.
Assignment associate_frame(std::span<const GroundTruthBox> gt, std::span<const Detection> detections,
                           double iou_gate = 0.1);

}  // namespace pemsim
