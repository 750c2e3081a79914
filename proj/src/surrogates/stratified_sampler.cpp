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

#include "pemsim/surrogates/stratified_sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace pemsim::surrogates {

StratifiedSampler::StratifiedSampler(std::span<const double> distances, int bins) {
  if (bins < 1) throw std::invalid_argument("stratified sampler: bins must be >= 1");
  if (distances.empty()) throw std::invalid_argument("stratified sampler: empty dataset");
  const auto [lo_it, hi_it] = std::minmax_element(distances.begin(), distances.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / bins;
  std::vector<std::vector<int>> all(bins);
  bin_of_.resize(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) {
    int b = width > 0.0 ? static_cast<int>((distances[i] - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    all[b].push_back(static_cast<int>(i));
  }
  for (auto& bin : all) {
    if (bin.empty()) continue;
    const int id = static_cast<int>(members_.size());
    for (int i : bin) bin_of_[i] = id;
    members_.push_back(std::move(bin));
  }
}

std::vector<int> StratifiedSampler::sample(int count, std::mt19937_64& rng) const {
  // Uniform over non-empty bins, then uniform within the bin: P(i) is proportional to 1/|bin(i)|.
  std::vector<int> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick_bin(0, members_.size() - 1);
    const auto& bin = members_[pick_bin(rng)];
    std::uniform_int_distribution<std::size_t> pick(0, bin.size() - 1);
    out.push_back(bin[pick(rng)]);
  }
  return out;
}

std::vector<double> StratifiedSampler::weights() const {
  std::vector<double> w(bin_of_.size());
  const double nb = static_cast<double>(members_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (nb * static_cast<double>(members_[bin_of_[i]].size()));
  return w;
}

}  // namespace pemsim::surrogates
