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
#include <random>

#include "oracles.hpp"
#include "pemsim/association.hpp"

using namespace pemsim;
using doctest::Approx;

TEST_CASE("IoU of simple configurations") {
  const OrientedBox unit{{0.0, 0.0}, 1.0, 1.0, 0.0};
  CHECK(box_iou(unit, unit) == Approx(1.0));
  CHECK(box_iou(unit, {{3.0, 0.0}, 1.0, 1.0, 0.0}) == 0.0);
  CHECK(std::abs(box_iou(unit, {{0.5, 0.0}, 1.0, 1.0, 0.0}) - 1.0 / 3.0) < 1e-12);
  // Nested boxes: IoU is the area ratio.
  CHECK(box_iou(unit, {{0.0, 0.0}, 2.0, 2.0, 0.3}) == Approx(0.25));
}

TEST_CASE("IoU matches a grid estimate for rotated boxes") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.5, 1.5), s(0.5, 4.0), yaw(-3.0, 3.0);
  for (int k = 0; k < 10; ++k) {
    const OrientedBox a{{u(rng), u(rng)}, s(rng), s(rng), yaw(rng)};
    const OrientedBox b{{u(rng), u(rng)}, s(rng), s(rng), yaw(rng)};
    const double inter = oracle::grid_intersection_area(a, b, 800);
    const double ref = inter / (a.area() + b.area() - inter);
    CHECK(box_iou(a, b) == Approx(ref).epsilon(0.02));
  }
}

TEST_CASE("hungarian equals brute force on small matrices") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int n = 0; n <= 4; ++n) {
    for (int m = 0; m <= 4; ++m) {
      for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd c(n, m);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) c(i, j) = u(rng);
        const Assignment a = hungarian(c);
        REQUIRE(a.pairs.size() == static_cast<std::size_t>(std::min(n, m)));
        double total = 0.0;
        for (auto [i, j] : a.pairs) total += c(i, j);
        CHECK(total == Approx(oracle::brute_force_assignment(c)));
        CHECK(a.unmatched_rows.size() + a.pairs.size() == static_cast<std::size_t>(n));
        CHECK(a.unmatched_cols.size() + a.pairs.size() == static_cast<std::size_t>(m));
      }
    }
  }
}

TEST_CASE("hungarian tie breaking prefers small index sums") {
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(2, 3);
  const Assignment a = hungarian(zeros);
  REQUIRE(a.pairs.size() == 2);
  int sum = 0;
  for (auto [i, j] : a.pairs) sum += i + j;
  CHECK(sum == 2);  // columns 0 and 1
  CHECK(a.unmatched_cols == std::vector<int>{2});
  Eigen::MatrixXd bad(1, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(hungarian(bad), std::invalid_argument);
}

TEST_CASE("frame association gates on IoU and class") {
  std::vector<GroundTruthBox> gt = {{{{10.0, 0.0}, 4.5, 1.8, 0.0}, ActorClass::vehicle},
                                    {{{20.0, 3.0}, 0.6, 0.6, 0.0}, ActorClass::pedestrian},
                                    {{{30.0, -3.0}, 4.5, 1.8, 0.0}, ActorClass::vehicle}};
  std::vector<Detection> det(4);
  det[0].detected = true;
  det[0].position = {10.2, 0.1};
  det[1].detected = true;  // right place, wrong class
  det[1].position = {20.0, 3.0};
  det[1].extent = {0.6, 0.6};
  det[2].detected = false;  // an undetected placeholder is never matched
  det[2].position = {30.0, -3.0};
  det[3].detected = true;  // far from everything: a false positive
  det[3].position = {50.0, 10.0};
  const Assignment a = associate_frame(gt, det, 0.1);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<int, int>{0, 0});
  CHECK(a.unmatched_rows == std::vector<int>{1, 2});
  CHECK(std::find(a.unmatched_cols.begin(), a.unmatched_cols.end(), 3) != a.unmatched_cols.end());
  CHECK(std::find(a.unmatched_cols.begin(), a.unmatched_cols.end(), 2) == a.unmatched_cols.end());
}
