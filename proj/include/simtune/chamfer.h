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

#ifndef SIMTUNE_CHAMFER_H_
#define SIMTUNE_CHAMFER_H_

#include <span>
#include <vector>

#include "simtune/geometry.h"
#include "simtune/vec.h"

namespace simtune {

// Static 3-d tree over a point set for exact nearest-neighbour queries.
// Ties resolve to the lower point index, so results are reproducible.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3d> points);

  // Index of the nearest point; squared distance through `sq_dist`.
  int Nearest(const Vec3d& q, double* sq_dist = nullptr) const;
  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int begin, end;  // range in order_
    int axis;        // -1 for leaves
    double split;
    int left, right;
  };
  int Build(int begin, int end);
  void Search(int node, const Vec3d& q, int* best, double* best_sq) const;

  std::vector<Vec3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Nearest-neighbour assignment in both directions between a and b.
struct ChamferMatch {
  std::vector<int> a_to_b;
  std::vector<int> b_to_a;
  double forward = 0.0;   // sum over a of squared distances
  double backward = 0.0;  // sum over b
};

ChamferMatch MatchClouds(std::span<const Vec3d> a, std::span<const Vec3d> b);
// Reuses a prebuilt tree over b.
ChamferMatch MatchClouds(std::span<const Vec3d> a, std::span<const Vec3d> b,
                         const KdTree& b_tree);

// Sum of squared nearest-neighbour distances in both directions.
double Chamfer(const PointCloud& a, const PointCloud& b);

// Per-cloud means instead of sums: forward / |a| + backward / |b|.
double MeanChamfer(std::span<const Vec3d> a, std::span<const Vec3d> b);

}  // namespace simtune

#endif  // SIMTUNE_CHAMFER_H_
