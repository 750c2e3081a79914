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
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pemsim/detector.hpp"
#include "pemsim/surrogates/features.hpp"
#include "pemsim/surrogates/mlp.hpp"

namespace pemsim::surrogates {

/// Decoded network head. Row layout of the raw output:
///   0 detection logit, 1-2 mu(x,y), 3-4 log sigma(x,y), [5-6 mu(vx,vy), 7-8 log sigma(vx,vy)]
struct NSOutput {
  double p_det = 0.5;
  Vec2 mu = Vec2::Zero();
  Vec2 log_sigma = Vec2::Zero();
  std::optional<Vec2> mu_velocity;
  std::optional<Vec2> log_sigma_velocity;

  Vec2 sigma() const { return log_sigma.array().exp(); }
};

int ns_output_dim(bool velocity_head);
NSOutput decode_output(const Eigen::VectorXd& raw, bool velocity_head);

/// Column-aligned targets for a batch of B rows.
struct NSBatchTargets {
  Eigen::VectorXd detected;       // 0 / 1
  Eigen::MatrixXd position;       // 2 x B positional error targets
  Eigen::MatrixXd velocity;       // 2 x B velocity error targets
  Eigen::VectorXd velocity_mask;  // 1 where a velocity target exists and the row is detected

  Eigen::Index size() const { return detected.size(); }
};

NSBatchTargets make_targets(std::span<const TrainingTuple> rows);
NSBatchTargets make_targets(std::span<const TrainingTuple> rows, std::span<const int> indices);

/// Mean over the batch of the per-row negative log-likelihood: Bernoulli term on detection plus,
/// for detected rows, independent per-axis Gaussian terms on position (and velocity when enabled).
double ns_loss(const Eigen::MatrixXd& raw_outputs, const NSBatchTargets& targets, bool velocity_head);
/// Derivative of ns_loss with respect to the raw network outputs.
Eigen::MatrixXd ns_loss_grad(const Eigen::MatrixXd& raw_outputs, const NSBatchTargets& targets,
                             bool velocity_head);

struct NSGradients {
  double loss = 0.0;
  MLPParams grads;
};

/// Loss and parameter gradients for standardized inputs `x` (features x B).
NSGradients ns_backward(const MLPParams& params, const Eigen::MatrixXd& x, const NSBatchTargets& targets,
                        bool velocity_head, Mode mode, std::mt19937_64* rng);

struct NSHyperparams {
  double lr = 1e-3;
  int iterations = 20000;
  double dropout = 0.3;
  int batch_size = 1024;
  int width = 64;
  int blocks = 3;
  int eval_every = 500;
  int distance_bins = 10;
  bool velocity_head = true;
  std::uint64_t seed = 0;
};

class NeuralSurrogate {
 public:
  NeuralSurrogate() = default;
  NeuralSurrogate(MLPParams params, Standardizer standardizer, bool velocity_head);

  const MLPParams& params() const { return params_; }
  const Standardizer& standardizer() const { return standardizer_; }
  bool velocity_head() const { return velocity_head_; }

  std::vector<NSOutput> predict(std::span<const SalientVector> salients) const;
  NSOutput predict_one(const SalientVector& salient) const;

 private:
  MLPParams params_;
  Standardizer standardizer_;
  bool velocity_head_ = true;
};

/// Draws one surrogate detection: detected ~ Bernoulli(p_det); the position is the true position
/// plus a Gaussian error sample (same for velocity when the head is present).
Detection ns_sample(const NSOutput& out, const SalientVector& salient, std::mt19937_64& rng);
Detection ns_sample(const NeuralSurrogate& model, const SalientVector& salient, std::mt19937_64& rng);

struct NSTrainResult {
  NeuralSurrogate model;
  double best_validation_loss = 0.0;
  int best_iteration = 0;
  double final_train_loss = 0.0;
  std::vector<std::pair<int, double>> validation_history;
};

/// Minibatch Adam with distance-stratified batches; keeps the parameters with the best validation loss.
NSTrainResult train_ns(std::span<const TrainingTuple> train, std::span<const TrainingTuple> validation,
                       const NSHyperparams& hp);

}  // namespace pemsim::surrogates
