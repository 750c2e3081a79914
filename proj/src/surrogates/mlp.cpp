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

#include "pemsim/surrogates/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace pemsim::surrogates {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& x) { return x.cwiseMax(0.0); }

Eigen::MatrixXd affine(const DenseLayer& l, const Eigen::MatrixXd& x) {
  return (l.weight * x).colwise() + l.bias;
}

Eigen::MatrixXd relu_grad(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& upstream) {
  return (pre.array() > 0.0).cast<double>() * upstream.array();
}

void accumulate(DenseLayer& grad, const Eigen::MatrixXd& d_out, const Eigen::MatrixXd& in) {
  grad.weight.noalias() += d_out * in.transpose();
  grad.bias += d_out.rowwise().sum();
}

}  // namespace

void MLPParams::validate() const {
  if (shape.input_dim < 1 || shape.width < 1 || shape.blocks < 0 || shape.output_dim < 1)
    throw std::invalid_argument("mlp: invalid shape");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("mlp: dropout must be in [0,1)");
  const std::size_t expected = 2 + 2 * static_cast<std::size_t>(shape.blocks);
  if (layers.size() != expected) throw std::invalid_argument("mlp: layer count does not match shape");
  auto check = [](const DenseLayer& l, int out, int in) {
    if (l.weight.rows() != out || l.weight.cols() != in || l.bias.size() != out)
      throw std::invalid_argument("mlp: layer dimensions do not chain");
  };
  check(layers.front(), shape.width, shape.input_dim);
  for (int k = 0; k < shape.blocks; ++k) {
    check(layers[1 + 2 * k], shape.width, shape.width);
    check(layers[2 + 2 * k], shape.width, shape.width);
  }
  check(layers.back(), shape.output_dim, shape.width);
}

Eigen::Index MLPParams::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::VectorXd MLPParams::to_vector() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index o = 0;
  for (const auto& l : layers) {
    flat.segment(o, l.weight.size()) = l.weight.reshaped();
    o += l.weight.size();
    flat.segment(o, l.bias.size()) = l.bias;
    o += l.bias.size();
  }
  return flat;
}

void MLPParams::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("mlp: flat parameter size mismatch");
  Eigen::Index o = 0;
  for (auto& l : layers) {
    l.weight.reshaped() = flat.segment(o, l.weight.size());
    o += l.weight.size();
    l.bias = flat.segment(o, l.bias.size());
    o += l.bias.size();
  }
}

MLPParams MLPParams::zeros_like() const {
  MLPParams z = *this;
  for (auto& l : z.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return z;
}

MLPParams init_mlp(const MLPShape& shape, double dropout, std::mt19937_64& rng) {
  MLPParams p;
  p.shape = shape;
  p.dropout = dropout;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto make = [&](int out, int in, double gain) {
    DenseLayer l;
    l.weight = Eigen::MatrixXd(out, in);
    const double scale = gain * std::sqrt(2.0 / in);
    for (Eigen::Index j = 0; j < l.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i) l.weight(i, j) = scale * normal(rng);
    l.bias = Eigen::VectorXd::Zero(out);
    return l;
  };
  p.layers.push_back(make(shape.width, shape.input_dim, 1.0));
  for (int k = 0; k < shape.blocks; ++k) {
    p.layers.push_back(make(shape.width, shape.width, 1.0));
    // Small residual branches keep the stream well conditioned at init.
    p.layers.push_back(make(shape.width, shape.width, 0.1));
  }
  p.layers.push_back(make(shape.output_dim, shape.width, 0.1));
  p.validate();
  return p;
}

Eigen::MatrixXd mlp_forward(const MLPParams& params, const Eigen::MatrixXd& x, Mode mode, std::mt19937_64* rng,
                            ForwardCache* cache) {
  if (x.rows() != params.shape.input_dim) throw std::invalid_argument("mlp_forward: input dimension mismatch");
  const bool use_dropout = mode == Mode::train && params.dropout > 0.0;
  if (use_dropout && rng == nullptr) throw std::invalid_argument("mlp_forward: dropout needs an rng");

  const int blocks = params.shape.blocks;
  Eigen::MatrixXd stem_pre = affine(params.layers.front(), x);
  Eigen::MatrixXd h = relu(stem_pre);
  if (cache) {
    cache->input = x;
    cache->stem_pre = stem_pre;
    cache->block_in.assign(blocks, {});
    cache->block_pre.assign(blocks, {});
    cache->dropout_mask.assign(blocks, {});
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < blocks; ++k) {
    const DenseLayer& fc1 = params.layers[1 + 2 * k];
    const DenseLayer& fc2 = params.layers[2 + 2 * k];
    Eigen::MatrixXd pre = affine(fc1, h);
    if (cache) {
      cache->block_in[k] = h;
      cache->block_pre[k] = pre;
    }
    h += affine(fc2, relu(pre));
    if (use_dropout && k + 1 < blocks) {
      // Inverted dropout between blocks.
      const double keep = 1.0 - params.dropout;
      Eigen::MatrixXd mask(h.rows(), h.cols());
      for (Eigen::Index j = 0; j < mask.cols(); ++j)
        for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = unit(*rng) < keep ? 1.0 / keep : 0.0;
      h = h.cwiseProduct(mask);
      if (cache) cache->dropout_mask[k] = std::move(mask);
    }
  }
  if (cache) cache->head_in = h;
  return affine(params.layers.back(), h);
}

MLPParams mlp_backward(const MLPParams& params, const ForwardCache& cache, const Eigen::MatrixXd& d_output) {
  MLPParams grads = params.zeros_like();
  const int blocks = params.shape.blocks;

  accumulate(grads.layers.back(), d_output, cache.head_in);
  Eigen::MatrixXd dh = params.layers.back().weight.transpose() * d_output;
  for (int k = blocks - 1; k >= 0; --k) {
    if (cache.dropout_mask[k].size() > 0) dh = dh.cwiseProduct(cache.dropout_mask[k]);
    const DenseLayer& fc1 = params.layers[1 + 2 * k];
    const DenseLayer& fc2 = params.layers[2 + 2 * k];
    const Eigen::MatrixXd& pre = cache.block_pre[k];
    accumulate(grads.layers[2 + 2 * k], dh, relu(pre));
    const Eigen::MatrixXd d_pre = relu_grad(pre, fc2.weight.transpose() * dh);
    accumulate(grads.layers[1 + 2 * k], d_pre, cache.block_in[k]);
    dh += fc1.weight.transpose() * d_pre;
  }
  const Eigen::MatrixXd d_stem = relu_grad(cache.stem_pre, dh);
  accumulate(grads.layers.front(), d_stem, cache.input);
  return grads;
}

}  // namespace pemsim::surrogates
