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

#include "pemsim/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pemsim {

namespace {

// Sutherland-Hodgman clip of `subject` against the convex counter-clockwise `clip`.
std::vector<Vec2> clip_polygon(std::vector<Vec2> subject, const std::array<Vec2, 4>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Vec2 a = clip[e];
    const Vec2 b = clip[(e + 1) % clip.size()];
    const Vec2 edge = b - a;
    auto side = [&](const Vec2& p) { return edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x()); };
    std::vector<Vec2> input = std::move(subject);
    subject.clear();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) subject.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        subject.push_back(cur);
      } else if (sp >= 0.0) {
        subject.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return subject;
}

}  // namespace

double box_iou(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::vector<Vec2> inter = clip_polygon({ca.begin(), ca.end()}, cb);
  const double area_i = inter.size() < 3 ? 0.0 : std::abs(polygon_area(inter));
  const double area_u = a.area() + b.area() - area_i;
  if (area_u <= 0.0) return 0.0;
  return std::clamp(area_i / area_u, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Hungarian (shortest augmenting path with potentials) over lexicographic costs.

namespace {

struct LexCost {
  double primary = 0.0;
  double secondary = 0.0;

  LexCost operator+(const LexCost& o) const { return {primary + o.primary, secondary + o.secondary}; }
  LexCost operator-(const LexCost& o) const { return {primary - o.primary, secondary - o.secondary}; }
  bool operator<(const LexCost& o) const {
    return primary < o.primary || (primary == o.primary && secondary < o.secondary);
  }
};

constexpr LexCost kInf{std::numeric_limits<double>::infinity(), 0.0};

// rows <= cols. Returns, per row, its assigned column.
std::vector<int> solve(const std::vector<std::vector<LexCost>>& a, int n, int m) {
  std::vector<LexCost> u(n + 1), v(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<LexCost> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      LexCost delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const LexCost cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] = u[p[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          minv[j] = minv[j] - delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
  Assignment out;
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) {
    for (int i = 0; i < rows; ++i) out.unmatched_rows.push_back(i);
    for (int j = 0; j < cols; ++j) out.unmatched_cols.push_back(j);
    return out;
  }
  if (!cost.allFinite()) throw std::invalid_argument("hungarian: costs must be finite");

  const bool transpose = rows > cols;
  const int n = transpose ? cols : rows;
  const int m = transpose ? rows : cols;
  std::vector<std::vector<LexCost>> a(n, std::vector<LexCost>(m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double c = transpose ? cost(j, i) : cost(i, j);
      a[i][j] = {c, static_cast<double>(i + j)};
    }
  const std::vector<int> assigned = solve(a, n, m);

  std::vector<char> row_used(rows, 0), col_used(cols, 0);
  for (int i = 0; i < n; ++i) {
    const int r = transpose ? assigned[i] : i;
    const int c = transpose ? i : assigned[i];
    out.pairs.emplace_back(r, c);
    row_used[r] = 1;
    col_used[c] = 1;
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (int i = 0; i < rows; ++i)
    if (!row_used[i]) out.unmatched_rows.push_back(i);
  for (int j = 0; j < cols; ++j)
    if (!col_used[j]) out.unmatched_cols.push_back(j);
  return out;
}

Assignment associate_frame(std::span<const GroundTruthBox> gt, std::span<const Detection> detections,
                           double iou_gate) {
  if (iou_gate < 0.0 || iou_gate >= 1.0) throw std::invalid_argument("associate_frame: iou_gate must be in [0,1)");
  std::vector<int> det_index;
  for (std::size_t j = 0; j < detections.size(); ++j)
    if (detections[j].detected) det_index.push_back(static_cast<int>(j));

  Eigen::MatrixXd iou = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt.size()),
                                              static_cast<Eigen::Index>(det_index.size()));
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t k = 0; k < det_index.size(); ++k) {
      const Detection& d = detections[det_index[k]];
      if (d.cls != gt[i].cls) continue;
      iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = box_iou(gt[i].box, d.box());
    }
  const Assignment raw = hungarian(Eigen::MatrixXd::Ones(iou.rows(), iou.cols()) - iou);

  Assignment out;
  std::vector<char> gt_used(gt.size(), 0), det_used(detections.size(), 0);
  for (const auto& [i, k] : raw.pairs) {
    if (iou(i, k) <= iou_gate) continue;
    out.pairs.emplace_back(i, det_index[k]);
    gt_used[i] = 1;
    det_used[det_index[k]] = 1;
  }
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (!gt_used[i]) out.unmatched_rows.push_back(static_cast<int>(i));
  for (int j : det_index)
    if (!det_used[j]) out.unmatched_cols.push_back(j);
  return out;
}

}  // namespace pemsim
