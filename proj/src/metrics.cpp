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

#include "pemsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pemsim::metrics {

ClassificationReport classify(const ConfusionCounts& c) {
  ClassificationReport r;
  r.counts = c;
  const long total = c.tp + c.fp + c.fn + c.tn;
  if (total == 0) throw std::invalid_argument("classification_metrics: no rows");
  r.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 1.0;
  r.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 1.0;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
  return r;
}

ClassificationReport classification_metrics(std::span<const DetectionOutcome> rows, ReferenceMode mode,
                                            double max_range) {
  ConfusionCounts c;
  for (const auto& row : rows) {
    if (row.distance > max_range) continue;
    const bool reference = mode == ReferenceMode::vs_gt ? row.ground_truth : row.detector_detected;
    if (row.predicted && reference) ++c.tp;
    else if (row.predicted) ++c.fp;
    else if (reference) ++c.fn;
    else ++c.tn;
  }
  return classify(c);
}

double sp_mse(std::span<const PositionPair> pairs, double max_range) {
  double total = 0.0;
  long n = 0;
  for (const auto& p : pairs) {
    if (p.distance > max_range) continue;
    total += (p.predicted - p.reference).squaredNorm();
    ++n;
  }
  if (n == 0) throw std::invalid_argument("sp_mse: no matched pairs within range");
  return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Trace comparison

void TrajectoryTrace::validate() const {
  if (t.empty()) throw std::invalid_argument("trace: empty");
  if (position.size() != t.size() || velocity.size() != t.size() || brake.size() != t.size())
    throw std::invalid_argument("trace: series lengths differ");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("trace: timestamps must be strictly increasing");
}

namespace {

const std::vector<Vec2>& series(const TrajectoryTrace& tr, TraceQuantity q) {
  return q == TraceQuantity::position ? tr.position : tr.velocity;
}

Vec2 interpolate(const std::vector<double>& t, const std::vector<Vec2>& v, double at) {
  const auto it = std::lower_bound(t.begin(), t.end(), at);
  if (it == t.begin()) return v.front();
  if (it == t.end()) return v.back();
  const auto i = static_cast<std::size_t>(it - t.begin());
  if (t[i] == at) return v[i];
  const double u = (at - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - u) * v[i - 1] + u * v[i];
}

struct AlignedDiff {
  std::vector<double> t;
  std::vector<double> norm;
};

AlignedDiff align(const TrajectoryTrace& a, const TrajectoryTrace& b, TraceQuantity q) {
  a.validate();
  b.validate();
  const double lo = std::max(a.t.front(), b.t.front());
  const double hi = std::min(a.t.back(), b.t.back());
  if (lo > hi) throw std::invalid_argument("trace comparison: time ranges do not overlap");
  AlignedDiff out;
  out.t.push_back(lo);
  for (const auto* tr : {&a, &b})
    for (double t : tr->t)
      if (t > lo && t < hi) out.t.push_back(t);
  if (hi > lo) out.t.push_back(hi);
  std::sort(out.t.begin(), out.t.end());
  out.t.erase(std::unique(out.t.begin(), out.t.end()), out.t.end());
  out.norm.reserve(out.t.size());
  for (double t : out.t)
    out.norm.push_back((interpolate(a.t, series(a, q), t) - interpolate(b.t, series(b, q), t)).norm());
  return out;
}

}  // namespace

double mean_eucl(const TrajectoryTrace& a, const TrajectoryTrace& b, TraceQuantity q) {
  const AlignedDiff d = align(a, b, q);
  if (d.t.size() == 1) return d.norm.front();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < d.t.size(); ++i) total += d.norm[i] * (d.t[i + 1] - d.t[i]);
  return total / (d.t.back() - d.t.front());
}

double max_eucl(const TrajectoryTrace& a, const TrajectoryTrace& b, TraceQuantity q) {
  const AlignedDiff d = align(a, b, q);
  return *std::max_element(d.norm.begin(), d.norm.end());
}

BrakingSummary mba_tmba(const TrajectoryTrace& trace) {
  if (trace.brake.size() != trace.t.size()) throw std::invalid_argument("mba_tmba: brake series misaligned");
  BrakingSummary out;
  if (trace.brake.empty()) return out;
  const auto it = std::max_element(trace.brake.begin(), trace.brake.end());  // first maximum
  if (*it <= 0.0) return out;
  out.mba = *it;
  out.tmba = trace.t[static_cast<std::size_t>(it - trace.brake.begin())] - trace.t.front();
  out.braked = true;
  return out;
}

CollisionCdf collision_interval_cdf(std::span<const std::vector<double>> runs) {
  CollisionCdf out;
  for (const auto& run : runs) {
    std::vector<double> times = run;
    std::sort(times.begin(), times.end());
    for (std::size_t i = 1; i < times.size(); ++i) out.gaps.push_back(times[i] - times[i - 1]);
  }
  if (out.gaps.empty()) return out;
  std::sort(out.gaps.begin(), out.gaps.end());
  const std::size_t n = out.gaps.size();
  for (std::size_t i = 0; i < n; ++i) out.cumulative.push_back(static_cast<double>(i + 1) / static_cast<double>(n));
  out.median = n % 2 == 1 ? out.gaps[n / 2] : 0.5 * (out.gaps[n / 2 - 1] + out.gaps[n / 2]);
  return out;
}

// ---------------------------------------------------------------------------
// Planner KL

PklResult pkl_from_samples(std::span<const Eigen::VectorXd> reference,
                           std::span<const std::vector<Eigen::VectorXd>> samples, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("pkl: bandwidth must be positive");
  if (samples.size() != reference.size()) throw std::invalid_argument("pkl: one sample set per timestep required");
  PklResult out;
  std::vector<double> logk;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const auto& zs = samples[t];
    if (zs.size() < 2) throw std::invalid_argument("pkl: need at least two samples per timestep");
    const double dim = static_cast<double>(reference[t].size());
    const double log_norm = dim * std::log(std::sqrt(2.0 * std::numbers::pi) * bandwidth);
    logk.clear();
    for (const auto& z : zs) {
      if (z.size() != reference[t].size()) throw std::invalid_argument("pkl: dimension mismatch");
      logk.push_back(-(reference[t] - z).squaredNorm() / (2.0 * bandwidth * bandwidth) - log_norm);
    }
    const double n = static_cast<double>(zs.size());
    const double peak = *std::max_element(logk.begin(), logk.end());
    double acc = 0.0;
    double mean = 0.0;
    for (double l : logk) {
      acc += std::exp(l - peak);
      mean += l;
    }
    out.kde_estimate -= peak + std::log(acc) - std::log(n);
    out.jensen_bound -= mean / n;
  }
  return out;
}

PklResult pkl_bound(std::span<const Eigen::VectorXd> reference,
                    const std::function<Eigen::VectorXd(std::size_t, std::mt19937_64&)>& replan, int n,
                    double bandwidth, std::mt19937_64& rng) {
  if (n < 2) throw std::invalid_argument("pkl: n must be at least 2");
  std::vector<std::vector<Eigen::VectorXd>> samples(reference.size());
  for (std::size_t t = 0; t < reference.size(); ++t)
    for (int k = 0; k < n; ++k) samples[t].push_back(replan(t, rng));
  return pkl_from_samples(reference, samples, bandwidth);
}

PairwiseTable normalized_pairwise_table(const PairwiseTable& table, const std::string& norm_row,
                                        const std::string& norm_col) {
  auto index = [&](const std::string& label) {
    const auto it = std::find(table.labels.begin(), table.labels.end(), label);
    if (it == table.labels.end()) throw std::invalid_argument("pairwise table: missing label " + label);
    return static_cast<Eigen::Index>(it - table.labels.begin());
  };
  const double norm = table.values(index(norm_row), index(norm_col));
  if (norm == 0.0 || !std::isfinite(norm)) throw std::invalid_argument("pairwise table: zero normalizer");
  PairwiseTable out{table.labels, table.values / norm};
  out.values.diagonal().setZero();
  return out;
}

}  // namespace pemsim::metrics
