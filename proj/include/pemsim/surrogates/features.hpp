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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pemsim/scene.hpp"

namespace pemsim::surrogates {

/// Column order of the flattened salient vector fed to every learned surrogate.
const std::vector<std::string>& feature_names();
int feature_count();

Eigen::VectorXd flatten(const SalientVector& s);
/// features x N design matrix.
Eigen::MatrixXd flatten_all(std::span<const SalientVector> rows);

/// One per-actor, per-frame training example.
struct TrainingTuple {
  int scenario = 0;
  int frame = 0;
  SalientVector salient;
  bool detected = false;
  Vec2 position_error = Vec2::Zero();  // detected - true, ego frame
  std::optional<Vec2> velocity_error;  // present when the detector had a velocity estimate
};

struct Standardizer {
  static constexpr double kStdFloor = 1e-6;

  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  /// `x` is features x N.
  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

}  // namespace pemsim::surrogates
