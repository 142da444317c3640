// Copyright 2026 The Simtune Authors
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

#include "simtune/chamfer.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "simtune/errors.h"

namespace simtune {
namespace {

constexpr int kLeafSize = 8;

}  // namespace

KdTree::KdTree(std::span<const Vec3d> points)
    : points_(points.begin(), points.end()), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    Build(0, static_cast<int>(points_.size()));
  }
}

int KdTree::Build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, 0.0, -1, -1});
  if (end - begin <= kLeafSize) return id;
  Vec3d lo = points_[order_[begin]], hi = lo;
  for (int i = begin; i < end; ++i) {
    const Vec3d& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = Build(begin, mid);
  const int right = Build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::Search(int node, const Vec3d& q, int* best,
                    double* best_sq) const {
  const Node& nd = nodes_[node];
  if (nd.axis < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int idx = order_[i];
      const double d = SquaredNorm(points_[idx] - q);
      if (d < *best_sq || (d == *best_sq && idx < *best)) {
        *best_sq = d;
        *best = idx;
      }
    }
    return;
  }
  const double diff = q[nd.axis] - nd.split;
  const int near = diff < 0.0 ? nd.left : nd.right;
  const int far = diff < 0.0 ? nd.right : nd.left;
  Search(near, q, best, best_sq);
  // <= keeps equal-distance candidates on the far side reachable.
  if (diff * diff <= *best_sq) Search(far, q, best, best_sq);
}

int KdTree::Nearest(const Vec3d& q, double* sq_dist) const {
  if (points_.empty()) throw InvalidArgument("nearest query on empty tree");
  int best = -1;
  double best_sq = std::numeric_limits<double>::infinity();
  Search(0, q, &best, &best_sq);
  if (sq_dist != nullptr) *sq_dist = best_sq;
  return best;
}

ChamferMatch MatchClouds(std::span<const Vec3d> a, std::span<const Vec3d> b,
                         const KdTree& b_tree) {
  if (a.empty() || b.empty()) throw InvalidArgument("empty point cloud");
  ChamferMatch m;
  const KdTree a_tree(a);
  m.a_to_b.resize(a.size());
  m.b_to_a.resize(b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    double d;
    m.a_to_b[i] = b_tree.Nearest(a[i], &d);
    m.forward += d;
  }
  for (size_t j = 0; j < b.size(); ++j) {
    double d;
    m.b_to_a[j] = a_tree.Nearest(b[j], &d);
    m.backward += d;
  }
  return m;
}

ChamferMatch MatchClouds(std::span<const Vec3d> a, std::span<const Vec3d> b) {
  return MatchClouds(a, b, KdTree(b));
}

double Chamfer(const PointCloud& a, const PointCloud& b) {
  const ChamferMatch m = MatchClouds(a.points, b.points);
  return m.forward + m.backward;
}

double MeanChamfer(std::span<const Vec3d> a, std::span<const Vec3d> b) {
  const ChamferMatch m = MatchClouds(a, b);
  return m.forward / a.size() + m.backward / b.size();
}

}  // namespace simtune
