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

#ifndef SIMTUNE_METRICS_H_
#define SIMTUNE_METRICS_H_

#include <span>
#include <vector>

#include "simtune/constraints.h"
#include "simtune/geometry.h"
#include "simtune/residual_mapping.h"
#include "simtune/solver.h"
#include "simtune/twin.h"

namespace simtune {

// Mean Chamfer between the observed particles of x and z.
double ChamferGap(const DeformableMesh& mesh, const std::vector<Vec3d>& x,
                  const PointCloud& z);

struct FutureGap {
  double value = 0.0;  // NaN when no future frame is available
  int horizon = 0;     // steps actually rolled out
  bool truncated = false;
  std::vector<Vec3d> final_state;  // x_{t+horizon}
};

// Open-loop rollout of `horizon` steps from x_t with frozen weights. The
// residual is measured against each future observation but never applied.
// Fewer controls or observations than the horizon truncate the rollout.
FutureGap AverageFutureGap(const DeformableMesh& mesh, const ConstraintSet& cs,
                           const ConstraintWeights<double>& w,
                           const std::vector<Vec3d>& x_t,
                           std::span<const Control> future_controls,
                           std::span<const PointCloud* const> future_obs,
                           int horizon, const SolverConfig& solver,
                           const ResidualConfig& residual);

// Index of the nearest particle of x for each point (lowest index on ties).
std::vector<int> NearestParticleIndices(const std::vector<Vec3d>& x,
                                        const std::vector<Vec3d>& points);

// sum_k | p_T[k] - (x_T[nn_k] - x_0[nn_k] + p_0[k]) | with nn fixed from
// (x_0, p_0).
double FutureKeypointError(const std::vector<Vec3d>& x_0,
                           const std::vector<Vec3d>& x_T,
                           const std::vector<Vec3d>& p_0,
                           const std::vector<Vec3d>& p_T,
                           const std::vector<int>& nn);
double FutureKeypointError(const std::vector<Vec3d>& x_0,
                           const std::vector<Vec3d>& x_T,
                           const std::vector<Vec3d>& p_0,
                           const std::vector<Vec3d>& p_T);

std::vector<Vec3d> KeypointPositions(const std::vector<Keypoint>& keypoints,
                                     const std::vector<Vec3d>& x);

}  // namespace simtune

#endif  // SIMTUNE_METRICS_H_
