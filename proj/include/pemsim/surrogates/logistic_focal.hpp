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
#include <random>
#include <span>

#include <Eigen/Core>

#include "pemsim/detector.hpp"
#include "pemsim/surrogates/features.hpp"

namespace pemsim::surrogates {

struct FocalConfig {
  double alpha = 0.6;
  double gamma = 2.0;
  double lr = 1e-2;
  int iterations = 3000;
  int batch_size = 2048;
  std::uint64_t seed = 0;
};

/// Mean focal loss -alpha_t (1 - p_t)^gamma log(p_t) over logits z with p = sigmoid(z);
/// alpha_t = alpha for positive labels, 1 - alpha for negatives. Optionally writes dLoss/dz.
double focal_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels, double alpha, double gamma,
                  Eigen::VectorXd* grad_logits = nullptr);

/// Mean binary cross-entropy, for reference.
double binary_cross_entropy(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels);

/// Weights over standardized features, bias last.
struct LRParams {
  Eigen::VectorXd weights;
};

/// Focal loss of the linear-logistic model on standardized `x` (features x N) and its weight gradient.
double lr_focal_objective(const LRParams& params, const Eigen::MatrixXd& x, const Eigen::VectorXd& labels,
                          double alpha, double gamma, Eigen::VectorXd* grad = nullptr);

class LogisticSurrogate {
 public:
  LogisticSurrogate() = default;
  LogisticSurrogate(LRParams params, Standardizer standardizer);

  const LRParams& params() const { return params_; }
  const Standardizer& standardizer() const { return standardizer_; }

  double probability(const SalientVector& s) const;

 private:
  LRParams params_;
  Standardizer standardizer_;
};

/// Bernoulli(p_t) detection; detected boxes carry the exact position and velocity.
Detection lr_apply(const LogisticSurrogate& model, const SalientVector& s, std::mt19937_64& rng);

struct LRTrainResult {
  LogisticSurrogate model;
  double final_loss = 0.0;
  bool single_class = false;
};

LRTrainResult train_lr_focal(std::span<const TrainingTuple> data, const FocalConfig& cfg);

}  // namespace pemsim::surrogates
