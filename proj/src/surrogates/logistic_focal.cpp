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

#include "pemsim/surrogates/logistic_focal.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "pemsim/surrogates/adam.hpp"

namespace pemsim::surrogates {

namespace {

// log(sigmoid(x)), stable for large |x|.
double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

double focal_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels, double alpha, double gamma,
                  Eigen::VectorXd* grad_logits) {
  if (logits.size() != labels.size()) throw std::invalid_argument("focal_loss: size mismatch");
  const auto n = logits.size();
  if (n == 0) return 0.0;
  if (grad_logits) grad_logits->resize(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool positive = labels(i) > 0.5;
    // p_t is the probability of the true class; sign maps dp_t/dz = sign * p_t (1 - p_t).
    const double zt = positive ? logits(i) : -logits(i);
    const double sign = positive ? 1.0 : -1.0;
    const double log_pt = log_sigmoid(zt);
    const double pt = std::exp(log_pt);
    const double q = logistic(-zt);  // 1 - p_t without cancellation
    const double at = positive ? alpha : 1.0 - alpha;
    const double q_gamma = gamma == 0.0 ? 1.0 : std::pow(q, gamma);
    total += -at * q_gamma * log_pt;
    if (grad_logits) (*grad_logits)(i) = sign * at * (gamma * q_gamma * pt * log_pt - q_gamma * q);
  }
  if (grad_logits) *grad_logits /= static_cast<double>(n);
  return total / static_cast<double>(n);
}

double binary_cross_entropy(const Eigen::VectorXd& logits, const Eigen::VectorXd& labels) {
  if (logits.size() != labels.size()) throw std::invalid_argument("binary_cross_entropy: size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    total -= labels(i) > 0.5 ? log_sigmoid(logits(i)) : log_sigmoid(-logits(i));
  return logits.size() ? total / static_cast<double>(logits.size()) : 0.0;
}

double lr_focal_objective(const LRParams& params, const Eigen::MatrixXd& x, const Eigen::VectorXd& labels,
                          double alpha, double gamma, Eigen::VectorXd* grad) {
  const Eigen::Index d = x.rows();
  if (params.weights.size() != d + 1) throw std::invalid_argument("lr_focal_objective: weight size mismatch");
  const Eigen::VectorXd logits =
      (params.weights.head(d).transpose() * x).transpose().array() + params.weights(d);
  Eigen::VectorXd g_logits;
  const double loss = focal_loss(logits, labels, alpha, gamma, grad ? &g_logits : nullptr);
  if (grad) {
    grad->resize(d + 1);
    grad->head(d) = x * g_logits;
    (*grad)(d) = g_logits.sum();
  }
  return loss;
}

LogisticSurrogate::LogisticSurrogate(LRParams params, Standardizer standardizer)
    : params_(std::move(params)), standardizer_(std::move(standardizer)) {
  if (params_.weights.size() != standardizer_.mean.size() + 1)
    throw std::invalid_argument("LogisticSurrogate: weights do not match the feature schema");
}

double LogisticSurrogate::probability(const SalientVector& s) const {
  const Eigen::VectorXd x = standardizer_.apply(flatten(s));
  const Eigen::Index d = x.size();
  return logistic(params_.weights.head(d).dot(x) + params_.weights(d));
}

Detection lr_apply(const LogisticSurrogate& model, const SalientVector& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Detection d;
  d.actor_id = s.actor_id;
  d.cls = s.cls;
  d.extent = s.extent;
  d.yaw = s.rel_yaw;
  d.detected = unit(rng) < model.probability(s);
  if (d.detected) {
    d.position = s.rel_position;
    d.velocity = s.velocity();
  }
  return d;
}

LRTrainResult train_lr_focal(std::span<const TrainingTuple> data, const FocalConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train_lr_focal: empty dataset");
  if (cfg.iterations < 1 || cfg.batch_size < 1) throw std::invalid_argument("train_lr_focal: invalid schedule");
  std::vector<SalientVector> salients;
  salients.reserve(data.size());
  Eigen::VectorXd labels(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    salients.push_back(data[i].salient);
    labels(static_cast<Eigen::Index>(i)) = data[i].detected ? 1.0 : 0.0;
  }
  LRTrainResult result;
  const double positives = labels.sum();
  result.single_class = positives == 0.0 || positives == static_cast<double>(labels.size());
  if (result.single_class) std::cerr << "[warn] train_lr_focal: dataset contains a single class\n";

  const Eigen::MatrixXd raw = flatten_all(salients);
  const Standardizer standardizer = Standardizer::fit(raw);
  const Eigen::MatrixXd x = standardizer.apply(raw);

  LRParams params{Eigen::VectorXd::Zero(x.rows() + 1)};
  AdamState adam = AdamState::zeros(params.weights.size());
  const AdamConfig adam_cfg{cfg.lr};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(data.size()) - 1);
  std::vector<int> idx(static_cast<std::size_t>(cfg.batch_size));
  for (int it = 0; it < cfg.iterations; ++it) {
    for (auto& i : idx) i = pick(rng);
    Eigen::VectorXd grad;
    lr_focal_objective(params, x(Eigen::all, idx), labels(idx), cfg.alpha, cfg.gamma, &grad);
    adam_step(params.weights, grad, adam, adam_cfg);
  }
  result.final_loss = lr_focal_objective(params, x, labels, cfg.alpha, cfg.gamma);
  result.model = LogisticSurrogate(std::move(params), standardizer);
  return result;
}

}  // namespace pemsim::surrogates
