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

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pemsim/detector.hpp"
#include "pemsim/surrogates/gaussian_fuzzer.hpp"
#include "pemsim/surrogates/logistic_focal.hpp"
#include "pemsim/surrogates/neural_surrogate.hpp"

namespace pemsim::surrogates {

enum class SurrogateKind { gt, gf, lr, ns };

std::string to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(const std::string& name);

struct GroundTruthModel {};

/// A trained (or trivial) stand-in for the backbone detector.
class SurrogateModel {
 public:
  using Storage = std::variant<GroundTruthModel, GFParams, LogisticSurrogate, NeuralSurrogate>;

  SurrogateModel() = default;
  explicit SurrogateModel(Storage storage) : storage_(std::move(storage)) {}

  SurrogateKind kind() const;
  const Storage& storage() const { return storage_; }

  /// One sampled detection per salient actor; never produces false positives.
  std::vector<Detection> perceive(std::span<const SalientVector> salients, std::mt19937_64& rng) const;
  /// Model probability that each actor is detected (1 for GT and GF).
  std::vector<double> detection_probabilities(std::span<const SalientVector> salients) const;

 private:
  Storage storage_;
};

inline constexpr int kModelFormatVersion = 1;

/// Text serialization: {"format", "version", "kind", "features", ...kind-specific arrays}.
nlohmann::json to_json(const SurrogateModel& model);
SurrogateModel model_from_json(const nlohmann::json& j);

void save_model(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_model(const std::filesystem::path& path);

}  // namespace pemsim::surrogates
