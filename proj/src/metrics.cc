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

#include "simtune/metrics.h"

#include <cmath>
#include <limits>

#include "simtune/chamfer.h"
#include "simtune/errors.h"

namespace simtune {

double ChamferGap(const DeformableMesh& mesh, const std::vector<Vec3d>& x,
                  const PointCloud& z) {
  return MeanChamfer(SurfacePositions(mesh, x), z.points);
}

FutureGap AverageFutureGap(const DeformableMesh& mesh, const ConstraintSet& cs,
                           const ConstraintWeights<double>& w,
                           const std::vector<Vec3d>& x_t,
                           std::span<const Control> future_controls,
                           std::span<const PointCloud* const> future_obs,
                           int horizon, const SolverConfig& solver,
                           const ResidualConfig& residual) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  FutureGap out;
  const int steps = std::min<int>(
      horizon, std::min(future_controls.size(), future_obs.size()));
  out.horizon = steps;
  out.truncated = steps < horizon;
  std::vector<Vec3d> x = x_t;
  double sum = 0.0;
  for (int s = 0; s < steps; ++s) {
    x = PbdStep(mesh, x, future_controls[s], cs, w, solver);
    const MappingResult m = ResidualMap(mesh, x, *future_obs[s], cs, residual);
    double sq = 0.0;
    for (const auto& d : m.field.delta) sq += SquaredNorm(d);
    sum += std::sqrt(sq);
  }
  out.value = steps > 0 ? sum / steps : std::numeric_limits<double>::quiet_NaN();
  out.final_state = std::move(x);
  return out;
}

std::vector<int> NearestParticleIndices(const std::vector<Vec3d>& x,
                                        const std::vector<Vec3d>& points) {
  const KdTree tree(x);
  std::vector<int> nn;
  nn.reserve(points.size());
  for (const auto& p : points) nn.push_back(tree.Nearest(p));
  return nn;
}

double FutureKeypointError(const std::vector<Vec3d>& x_0,
                           const std::vector<Vec3d>& x_T,
                           const std::vector<Vec3d>& p_0,
                           const std::vector<Vec3d>& p_T,
                           const std::vector<int>& nn) {
  if (p_0.size() != p_T.size() || nn.size() != p_0.size()) {
    throw InvalidArgument("keypoint arrays differ in length");
  }
  double f = 0.0;
  for (size_t k = 0; k < p_0.size(); ++k) {
    const Vec3d dp = x_T[nn[k]] - x_0[nn[k]];
    f += Norm(p_T[k] - (dp + p_0[k]));
  }
  return f;
}

double FutureKeypointError(const std::vector<Vec3d>& x_0,
                           const std::vector<Vec3d>& x_T,
                           const std::vector<Vec3d>& p_0,
                           const std::vector<Vec3d>& p_T) {
  return FutureKeypointError(x_0, x_T, p_0, p_T,
                             NearestParticleIndices(x_0, p_0));
}

std::vector<Vec3d> KeypointPositions(const std::vector<Keypoint>& keypoints,
                                     const std::vector<Vec3d>& x) {
  std::vector<Vec3d> out;
  out.reserve(keypoints.size());
  for (const auto& k : keypoints) out.push_back(k.At(x));
  return out;
}

}  // namespace simtune
