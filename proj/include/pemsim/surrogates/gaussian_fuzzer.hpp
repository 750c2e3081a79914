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

#include <array>
#include <random>
#include <span>

#include "pemsim/detector.hpp"
#include "pemsim/surrogates/features.hpp"

namespace pemsim::surrogates {

struct Gaussian1D {
  double mean = 0.0;
  double std = 1.0;
};

struct StudentT {
  double loc = 0.0;
  double scale = 1.0;
  double dof = 3.0;
};

/// Summed negative log-likelihood of `xs` under `t`.
double studentt_nll(std::span<const double> xs, const StudentT& t);

/// Moment-based starting point at fixed dof (scale matched to the sample variance when dof > 2).
StudentT studentt_moment_init(std::span<const double> xs, double dof);

/// Location/scale maximum likelihood at fixed dof via the EM fixed-point iteration.
StudentT fit_studentt(std::span<const double> xs, double dof = 3.0, int max_iterations = 500, double tol = 1e-12);

/// Maximum-likelihood mean / standard deviation (1/n), std floored at 1e-6.
Gaussian1D fit_gaussian(std::span<const double> xs);

struct GFParams {
  std::array<Gaussian1D, 2> position;
  std::array<StudentT, 2> velocity;
};

/// Needs at least two detected rows.
GFParams fit_gf(std::span<const TrainingTuple> data, double velocity_dof = 3.0);

/// Always detects; perturbs the exact position (Gaussian) and velocity (StudentT).
Detection gf_sample(const GFParams& params, const SalientVector& s, std::mt19937_64& rng);

/// Exact ground truth, always detected.
Detection gt_passthrough(const SalientVector& s);

}  // namespace pemsim::surrogates
