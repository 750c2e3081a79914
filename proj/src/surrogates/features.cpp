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

#include "pemsim/surrogates/features.hpp"

#include <cmath>
#include <stdexcept>

namespace pemsim::surrogates {

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "rel_x",  "rel_y", "cos_rel_yaw", "sin_rel_yaw", "speed",         "angular_velocity",
      "length", "width", "occlusion",   "distance",    "class_vehicle", "class_pedestrian"};
  return names;
}

int feature_count() { return static_cast<int>(feature_names().size()); }

Eigen::VectorXd flatten(const SalientVector& s) {
  Eigen::VectorXd x(feature_count());
  x << s.rel_position.x(), s.rel_position.y(), std::cos(s.rel_yaw), std::sin(s.rel_yaw), s.speed,
      s.angular_velocity, s.extent.length, s.extent.width, s.occlusion, s.distance, s.class_onehot[0],
      s.class_onehot[1];
  return x;
}

Eigen::MatrixXd flatten_all(std::span<const SalientVector> rows) {
  Eigen::MatrixXd x(feature_count(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = flatten(rows[i]);
  return x;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.cols() == 0) throw std::invalid_argument("standardize_fit: empty dataset");
  Standardizer s;
  s.mean = x.rowwise().mean();
  const Eigen::MatrixXd centred = x.colwise() - s.mean;
  s.std = (centred.array().square().rowwise().sum() / static_cast<double>(x.cols())).sqrt().matrix();
  s.std = s.std.cwiseMax(kStdFloor);
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != mean.size()) throw std::invalid_argument("standardize_apply: feature dimension mismatch");
  return (x.colwise() - mean).array().colwise() / std.array();
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("standardize_apply: feature dimension mismatch");
  return ((x - mean).array() / std.array()).matrix();
}

}  // namespace pemsim::surrogates
