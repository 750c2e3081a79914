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

#include "pemsim/surrogates/gaussian_fuzzer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pemsim::surrogates {

double studentt_nll(std::span<const double> xs, const StudentT& t) {
  const double nu = t.dof;
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi) - std::log(t.scale);
  double total = 0.0;
  for (double x : xs) {
    const double z = (x - t.loc) / t.scale;
    total -= log_norm - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
  }
  return total;
}

Gaussian1D fit_gaussian(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("fit_gaussian: empty sample");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::max(std::sqrt(ss / n), 1e-6)};
}

StudentT studentt_moment_init(std::span<const double> xs, double dof) {
  const Gaussian1D g = fit_gaussian(xs);
  const double factor = dof > 2.0 ? std::sqrt((dof - 2.0) / dof) : 1.0;
  return {g.mean, std::max(g.std * factor, 1e-6), dof};
}

StudentT fit_studentt(std::span<const double> xs, double dof, int max_iterations, double tol) {
  if (xs.size() < 2) throw std::invalid_argument("fit_studentt: need at least two samples");
  if (!(dof > 0.0)) throw std::invalid_argument("fit_studentt: dof must be positive");
  StudentT t = studentt_moment_init(xs, dof);
  const double n = static_cast<double>(xs.size());
  std::vector<double> w(xs.size());
  for (int it = 0; it < max_iterations; ++it) {
    double sw = 0.0;
    double swx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double z = (xs[i] - t.loc) / t.scale;
      w[i] = (dof + 1.0) / (dof + z * z);
      sw += w[i];
      swx += w[i] * xs[i];
    }
    const double loc = swx / sw;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) ss += w[i] * (xs[i] - loc) * (xs[i] - loc);
    const double scale = std::max(std::sqrt(ss / n), 1e-6);
    const bool converged = std::abs(loc - t.loc) <= tol * (1.0 + std::abs(loc)) &&
                           std::abs(scale - t.scale) <= tol * (1.0 + scale);
    t.loc = loc;
    t.scale = scale;
    if (converged) break;
  }
  return t;
}

GFParams fit_gf(std::span<const TrainingTuple> data, double velocity_dof) {
  std::array<std::vector<double>, 2> pos, vel;
  for (const auto& r : data) {
    if (!r.detected) continue;
    for (int a = 0; a < 2; ++a) pos[a].push_back(r.position_error[a]);
    if (r.velocity_error)
      for (int a = 0; a < 2; ++a) vel[a].push_back((*r.velocity_error)[a]);
  }
  if (pos[0].size() < 2) throw std::invalid_argument("fit_gf: need at least two detected rows");
  GFParams p;
  for (int a = 0; a < 2; ++a) {
    p.position[a] = fit_gaussian(pos[a]);
    // Without velocity targets the fuzzer leaves velocities untouched.
    p.velocity[a] = vel[a].size() >= 2 ? fit_studentt(vel[a], velocity_dof) : StudentT{0.0, 1e-6, velocity_dof};
  }
  return p;
}

Detection gf_sample(const GFParams& params, const SalientVector& s, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Detection d;
  d.actor_id = s.actor_id;
  d.cls = s.cls;
  d.extent = s.extent;
  d.yaw = s.rel_yaw;
  d.detected = true;
  Vec2 v = s.velocity();
  for (int a = 0; a < 2; ++a) {
    d.position[a] = s.rel_position[a] + params.position[a].mean + params.position[a].std * normal(rng);
    std::student_t_distribution<double> student(params.velocity[a].dof);
    v[a] += params.velocity[a].loc + params.velocity[a].scale * student(rng);
  }
  d.velocity = v;
  return d;
}

Detection gt_passthrough(const SalientVector& s) {
  Detection d;
  d.actor_id = s.actor_id;
  d.cls = s.cls;
  d.extent = s.extent;
  d.yaw = s.rel_yaw;
  d.detected = true;
  d.position = s.rel_position;
  d.velocity = s.velocity();
  return d;
}

}  // namespace pemsim::surrogates
