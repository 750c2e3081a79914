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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pemsim/harness/config.hpp"
#include "pemsim/harness/dataset.hpp"
#include "pemsim/harness/pipeline.hpp"
#include "pemsim/metrics.hpp"
#include "pemsim/surrogates/surrogate_model.hpp"

namespace pemsim::harness {

// ---- collect

/// Tuples and false positives of one closed-loop detector run of scenario `index`.
Dataset collect_scenario(const HarnessConfig& cfg, int index, std::uint64_t seed);

struct CollectOutput {
  Dataset train;
  Dataset test;
};

/// Runs every train and test scenario; writes train.jsonl / test.jsonl and the manifest when `out_dir` is set.
CollectOutput collect(const HarnessConfig& cfg, std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir);

// ---- train

struct TrainOutput {
  surrogates::SurrogateModel model;
  nlohmann::json summary;  // losses and sizes
};

/// Throws on an empty dataset. NS holds out a seeded random validation fraction.
TrainOutput train_model(const Dataset& train, surrogates::SurrogateKind kind, const HarnessConfig& cfg,
                        std::uint64_t seed);

// ---- eval-model

struct DistanceBinRow {
  double lo = 0.0;
  double hi = 0.0;
  long rows = 0;
  double detector_recall = 0.0;   // detector vs ground truth
  double surrogate_recall = 0.0;  // sampled surrogate vs ground truth
  double accuracy_vs_detector = 0.0;
};

struct EvalReport {
  std::string kind;
  long rows = 0;  // tuples within range
  metrics::ClassificationReport surrogate_vs_gt;
  metrics::ClassificationReport surrogate_vs_detector;
  metrics::ClassificationReport detector_vs_gt;
  std::optional<double> surrogate_sp_mse;
  std::optional<double> detector_sp_mse;
  std::vector<DistanceBinRow> bins;

  nlohmann::json to_json() const;
};

/// Versus ground truth the surrogate is sampled; versus the detector its most likely outcome is used.
EvalReport eval_model(const surrogates::SurrogateModel& model, const Dataset& test, std::uint64_t seed,
                      double max_range = metrics::kDefaultMaxRange, int bins = 10);

// ---- run

struct BehaviourRun {
  std::uint64_t seed = 0;
  RunResult result;
};

/// One closed-loop run per seed (the seed drives perception sampling only). With `out_dir`, writes
/// <out_dir>/<variant>/seed_<k>.jsonl, timing_seed_<k>.json and updates <out_dir>/manifest.json.
std::vector<BehaviourRun> run_behaviour(const HarnessConfig& cfg, PerceptionVariant variant,
                                        std::shared_ptr<const surrogates::SurrogateModel> model,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::optional<std::filesystem::path>& out_dir, int jobs = 1);

// ---- compare

/// variant label -> seed -> trace
using VariantTraces = std::map<std::string, std::map<std::uint64_t, metrics::TrajectoryTrace>>;

VariantTraces load_runs(const std::filesystem::path& runs_dir);

struct VariantBraking {
  double mba = 0.0;   // mean over seeds
  double tmba = 0.0;  // mean over seeds
  int runs = 0;
  int braked_runs = 0;
};

struct CompareReport {
  std::vector<std::string> labels;
  metrics::PairwiseTable mean_position, max_position, mean_velocity, max_velocity;
  bool normalized = false;
  metrics::PairwiseTable norm_mean_position, norm_max_position, norm_mean_velocity, norm_max_velocity;
  std::map<std::string, VariantBraking> braking;
  std::map<std::string, metrics::CollisionCdf> collisions;
  std::optional<metrics::PklResult> pkl;

  nlohmann::json to_json() const;
};

/// Pairwise entries average over the seeds both variants share. Normalization divides by the
/// (gt, detector) entry and throws if either variant is missing.
CompareReport compare(const VariantTraces& traces, bool normalize);

/// compare.json, pairwise.csv, mba.csv, collision_cdf_<variant>.csv and compare.md.
void write_compare(const CompareReport& report, const std::filesystem::path& out_dir);

/// Planner divergence bound of `model` against the detector along the detector's own closed-loop run.
metrics::PklResult pkl_report(const HarnessConfig& cfg, std::shared_ptr<const surrogates::SurrogateModel> model,
                              std::uint64_t seed);

// ---- report

/// Markdown summary of evaluation reports (label, json) and an optional compare.json.
std::string render_report(const std::vector<std::pair<std::string, nlohmann::json>>& evals,
                          const std::optional<nlohmann::json>& comparison);

}  // namespace pemsim::harness
