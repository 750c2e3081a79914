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

#include "pemsim/surrogates/neural_surrogate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pemsim/surrogates/adam.hpp"
#include "pemsim/surrogates/stratified_sampler.hpp"

namespace pemsim::surrogates {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

int ns_output_dim(bool velocity_head) { return velocity_head ? 9 : 5; }

NSOutput decode_output(const Eigen::VectorXd& raw, bool velocity_head) {
  if (raw.size() != ns_output_dim(velocity_head)) throw std::invalid_argument("decode_output: size mismatch");
  NSOutput out;
  out.p_det = logistic(raw(0));
  out.mu = raw.segment<2>(1);
  out.log_sigma = raw.segment<2>(3);
  if (velocity_head) {
    out.mu_velocity = raw.segment<2>(5);
    out.log_sigma_velocity = raw.segment<2>(7);
  }
  return out;
}

NSBatchTargets make_targets(std::span<const TrainingTuple> rows) {
  NSBatchTargets t;
  const auto n = static_cast<Eigen::Index>(rows.size());
  t.detected = Eigen::VectorXd::Zero(n);
  t.position = Eigen::MatrixXd::Zero(2, n);
  t.velocity = Eigen::MatrixXd::Zero(2, n);
  t.velocity_mask = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TrainingTuple& r = rows[static_cast<std::size_t>(i)];
    if (!r.detected) continue;
    t.detected(i) = 1.0;
    t.position.col(i) = r.position_error;
    if (r.velocity_error) {
      t.velocity.col(i) = *r.velocity_error;
      t.velocity_mask(i) = 1.0;
    }
  }
  return t;
}

NSBatchTargets make_targets(std::span<const TrainingTuple> rows, std::span<const int> indices) {
  std::vector<TrainingTuple> picked;
  picked.reserve(indices.size());
  for (int i : indices) picked.push_back(rows[static_cast<std::size_t>(i)]);
  return make_targets(picked);
}

double ns_loss(const Eigen::MatrixXd& raw, const NSBatchTargets& t, bool velocity_head) {
  if (raw.rows() != ns_output_dim(velocity_head) || raw.cols() != t.size())
    throw std::invalid_argument("ns_loss: outputs and targets are not aligned");
  if (t.size() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    const double y = t.detected(i);
    const double z = raw(0, i);
    total += softplus(z) - y * z;
    if (y == 0.0) continue;
    for (int a = 0; a < 2; ++a) {
      const double r = t.position(a, i) - raw(1 + a, i);
      const double ls = raw(3 + a, i);
      total += 0.5 * r * r * std::exp(-2.0 * ls) + ls + kHalfLog2Pi;
    }
    if (velocity_head && t.velocity_mask(i) > 0.0) {
      for (int a = 0; a < 2; ++a) {
        const double r = t.velocity(a, i) - raw(5 + a, i);
        const double ls = raw(7 + a, i);
        total += 0.5 * r * r * std::exp(-2.0 * ls) + ls + kHalfLog2Pi;
      }
    }
  }
  return total / static_cast<double>(raw.cols());
}

Eigen::MatrixXd ns_loss_grad(const Eigen::MatrixXd& raw, const NSBatchTargets& t, bool velocity_head) {
  if (raw.rows() != ns_output_dim(velocity_head) || raw.cols() != t.size())
    throw std::invalid_argument("ns_loss_grad: outputs and targets are not aligned");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
  if (t.size() == 0) return g;
  const double inv_n = 1.0 / static_cast<double>(raw.cols());
  auto gaussian = [&](Eigen::Index i, int mu_row, int ls_row, double target) {
    const double r = target - raw(mu_row, i);
    const double inv_var = std::exp(-2.0 * raw(ls_row, i));
    g(mu_row, i) = -r * inv_var * inv_n;
    g(ls_row, i) = (1.0 - r * r * inv_var) * inv_n;
  };
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    const double y = t.detected(i);
    g(0, i) = (logistic(raw(0, i)) - y) * inv_n;
    if (y == 0.0) continue;
    for (int a = 0; a < 2; ++a) gaussian(i, 1 + a, 3 + a, t.position(a, i));
    if (velocity_head && t.velocity_mask(i) > 0.0)
      for (int a = 0; a < 2; ++a) gaussian(i, 5 + a, 7 + a, t.velocity(a, i));
  }
  return g;
}

NSGradients ns_backward(const MLPParams& params, const Eigen::MatrixXd& x, const NSBatchTargets& targets,
                        bool velocity_head, Mode mode, std::mt19937_64* rng) {
  if (params.shape.output_dim != ns_output_dim(velocity_head))
    throw std::invalid_argument("ns_backward: network head does not match the output layout");
  ForwardCache cache;
  const Eigen::MatrixXd raw = mlp_forward(params, x, mode, rng, &cache);
  NSGradients out;
  out.loss = ns_loss(raw, targets, velocity_head);
  out.grads = mlp_backward(params, cache, ns_loss_grad(raw, targets, velocity_head));
  return out;
}

// ---------------------------------------------------------------------------
// Inference

NeuralSurrogate::NeuralSurrogate(MLPParams params, Standardizer standardizer, bool velocity_head)
    : params_(std::move(params)), standardizer_(std::move(standardizer)), velocity_head_(velocity_head) {
  params_.validate();
  if (params_.shape.output_dim != ns_output_dim(velocity_head_))
    throw std::invalid_argument("NeuralSurrogate: head size does not match velocity_head");
  if (standardizer_.mean.size() != params_.shape.input_dim)
    throw std::invalid_argument("NeuralSurrogate: standardizer does not match input dimension");
}

std::vector<NSOutput> NeuralSurrogate::predict(std::span<const SalientVector> salients) const {
  std::vector<NSOutput> out;
  if (salients.empty()) return out;
  const Eigen::MatrixXd raw = mlp_forward(params_, standardizer_.apply(flatten_all(salients)), Mode::eval, nullptr);
  out.reserve(salients.size());
  for (Eigen::Index i = 0; i < raw.cols(); ++i) out.push_back(decode_output(raw.col(i), velocity_head_));
  return out;
}

NSOutput NeuralSurrogate::predict_one(const SalientVector& salient) const {
  const Eigen::MatrixXd x = standardizer_.apply(flatten(salient));
  const Eigen::MatrixXd raw = mlp_forward(params_, x, Mode::eval, nullptr);
  return decode_output(raw.col(0), velocity_head_);
}

Detection ns_sample(const NSOutput& out, const SalientVector& salient, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double u = unit(rng);
  const Vec2 e_pos(normal(rng), normal(rng));
  const Vec2 e_vel(normal(rng), normal(rng));
  Detection d;
  d.actor_id = salient.actor_id;
  d.cls = salient.cls;
  d.extent = salient.extent;
  d.yaw = salient.rel_yaw;
  d.detected = u < out.p_det;
  if (!d.detected) return d;
  d.position = salient.rel_position + out.mu + out.sigma().cwiseProduct(e_pos);
  if (out.mu_velocity && out.log_sigma_velocity) {
    const Vec2 sigma_v = out.log_sigma_velocity->array().exp();
    d.velocity = salient.velocity() + *out.mu_velocity + sigma_v.cwiseProduct(e_vel);
  } else {
    d.velocity = salient.velocity();
  }
  return d;
}

Detection ns_sample(const NeuralSurrogate& model, const SalientVector& salient, std::mt19937_64& rng) {
  return ns_sample(model.predict_one(salient), salient, rng);
}

// ---------------------------------------------------------------------------
// Training

namespace {

std::vector<SalientVector> salients_of(std::span<const TrainingTuple> rows) {
  std::vector<SalientVector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.salient);
  return out;
}

double full_loss(const MLPParams& params, const Eigen::MatrixXd& x, const NSBatchTargets& t, bool velocity_head) {
  return ns_loss(mlp_forward(params, x, Mode::eval, nullptr), t, velocity_head);
}

}  // namespace

NSTrainResult train_ns(std::span<const TrainingTuple> train, std::span<const TrainingTuple> validation,
                       const NSHyperparams& hp) {
  if (train.empty()) throw std::invalid_argument("train_ns: empty training set");
  if (validation.empty()) throw std::invalid_argument("train_ns: empty validation set");
  if (hp.iterations < 1 || hp.batch_size < 1 || hp.eval_every < 1)
    throw std::invalid_argument("train_ns: iterations, batch_size and eval_every must be positive");

  const std::vector<SalientVector> train_s = salients_of(train);
  const Eigen::MatrixXd raw_x = flatten_all(train_s);
  const Standardizer standardizer = Standardizer::fit(raw_x);
  const Eigen::MatrixXd x = standardizer.apply(raw_x);
  const NSBatchTargets targets = make_targets(train);
  const Eigen::MatrixXd val_x = standardizer.apply(flatten_all(salients_of(validation)));
  const NSBatchTargets val_t = make_targets(validation);

  std::vector<double> distances;
  distances.reserve(train.size());
  for (const auto& s : train_s) distances.push_back(s.distance);
  const StratifiedSampler sampler(distances, hp.distance_bins);

  std::mt19937_64 rng(hp.seed);
  MLPShape shape{feature_count(), hp.width, hp.blocks, ns_output_dim(hp.velocity_head)};
  MLPParams params = init_mlp(shape, hp.dropout, rng);
  Eigen::VectorXd flat = params.to_vector();
  AdamState adam = AdamState::zeros(flat.size());
  const AdamConfig adam_cfg{hp.lr};

  NSTrainResult result;
  result.best_validation_loss = std::numeric_limits<double>::infinity();
  MLPParams best = params;

  for (int it = 1; it <= hp.iterations; ++it) {
    const std::vector<int> idx = sampler.sample(hp.batch_size, rng);
    Eigen::MatrixXd xb = x(Eigen::all, idx);
    NSBatchTargets tb;
    tb.detected = targets.detected(idx);
    tb.position = targets.position(Eigen::all, idx);
    tb.velocity = targets.velocity(Eigen::all, idx);
    tb.velocity_mask = targets.velocity_mask(idx);

    const NSGradients g = ns_backward(params, xb, tb, hp.velocity_head, Mode::train, &rng);
    adam_step(flat, g.grads.to_vector(), adam, adam_cfg);
    params.assign(flat);

    if (it % hp.eval_every == 0 || it == hp.iterations) {
      const double val = full_loss(params, val_x, val_t, hp.velocity_head);
      result.validation_history.emplace_back(it, val);
      if (val < result.best_validation_loss) {
        result.best_validation_loss = val;
        result.best_iteration = it;
        best = params;
      }
    }
  }

  result.final_train_loss = full_loss(best, x, targets, hp.velocity_head);
  result.model = NeuralSurrogate(std::move(best), standardizer, hp.velocity_head);
  return result;
}

}  // namespace pemsim::surrogates
