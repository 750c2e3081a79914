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

#include <random>
#include <span>
#include <vector>

namespace pemsim::surrogates {

/// Draws indices with probability proportional to 1 / (population of the datapoint's distance bin).
/// Bins split [min, max] of the distances into equal widths; empty bins are skipped.
class StratifiedSampler {
 public:
  StratifiedSampler(std::span<const double> distances, int bins = 10);

  std::vector<int> sample(int count, std::mt19937_64& rng) const;
  /// Per-datapoint sampling probability.
  std::vector<double> weights() const;
  int bin_of(int index) const { return bin_of_[index]; }

 private:
  std::vector<std::vector<int>> members_;  // non-empty bins only
  std::vector<int> bin_of_;
};

}  // namespace pemsim::surrogates
