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
#include <vector>

#include <Eigen/Core>

namespace pemsim::surrogates {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

struct MLPShape {
  int input_dim = 12;
  int width = 64;
  int blocks = 3;
  int output_dim = 5;
};

/// Fully-connected residual network:
///   h = relu(W_in x + b_in)
///   per block k: h = h + W2 relu(W1 h + b1) + b2, with dropout on h between blocks
///   y = W_out h + b_out
/// Layer order in `layers`: input projection, (fc1, fc2) per block, output head.
struct MLPParams {
  MLPShape shape;
  double dropout = 0.0;
  std::vector<DenseLayer> layers;

  void validate() const;
  Eigen::Index parameter_count() const;
  Eigen::VectorXd to_vector() const;
  void assign(const Eigen::VectorXd& flat);
  /// Same-shaped zero tensors.
  MLPParams zeros_like() const;
};

MLPParams init_mlp(const MLPShape& shape, double dropout, std::mt19937_64& rng);

enum class Mode { train, eval };

/// Activations retained for the backward pass.
struct ForwardCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd stem_pre;                  // W_in x + b_in
  std::vector<Eigen::MatrixXd> block_in;     // h entering each block
  std::vector<Eigen::MatrixXd> block_pre;    // W1 h + b1
  std::vector<Eigen::MatrixXd> dropout_mask; // scaled keep mask after each block (empty if unused)
  Eigen::MatrixXd head_in;
};

/// `x` is input_dim x B; returns output_dim x B. `rng` is only used in train mode with dropout > 0.
Eigen::MatrixXd mlp_forward(const MLPParams& params, const Eigen::MatrixXd& x, Mode mode, std::mt19937_64* rng,
                            ForwardCache* cache = nullptr);

/// Gradients of sum(d_output .* output) with respect to every parameter.
MLPParams mlp_backward(const MLPParams& params, const ForwardCache& cache, const Eigen::MatrixXd& d_output);

}  // namespace pemsim::surrogates
