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

#ifndef SIMTUNE_RESIDUAL_MAPPING_H_
#define SIMTUNE_RESIDUAL_MAPPING_H_

#include <span>
#include <vector>

#include "simtune/autodiff.h"
#include "simtune/chamfer.h"
#include "simtune/constraints.h"
#include "simtune/geometry.h"
#include "simtune/vec.h"

namespace simtune {

// Uniform per-family weights of the energy term in the mapping objective.
struct RealnessWeights {
  double distance = 1e-3;
  double volume = 1.0;
  double shape = 1e-5;
};

struct ResidualConfig {
  int inner_steps = 30;
  double learning_rate = 50.0;
  RealnessWeights realness;
  int max_restarts = 3;
  // Inner steps recorded on the tape when differentiating the mapping;
  // earlier steps enter the tape as constants.
  int tape_depth = 10;
  // Start from the caller's previous residual instead of zero.
  bool warm_start = false;
};

void ValidateResidualConfig(const ResidualConfig& cfg);

struct ResidualField {
  std::vector<Vec3d> delta;
};

struct MappingReport {
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double learning_rate = 0.0;  // rate of the accepted attempt
  int restarts = 0;
  // Every attempt raised the objective; the initial residual is returned.
  bool fallback = false;
};

struct MappingResult {
  ResidualField field;
  MappingReport report;
  // Residual entering the recorded tail of the accepted attempt.
  std::vector<Vec3d> tail_start;
};

ConstraintWeights<double> RealnessConstraintWeights(const ConstraintSet& cs,
                                                    const RealnessWeights& rw);

// E(x) = 1/2 C(x)^T diag(k') C(x).
double PhysicalRealness(const ConstraintSet& cs,
                        const ConstraintWeights<double>& k_prime,
                        const std::vector<Vec3d>& x);

// Positions of the observed particles (surface set) of `y`.
std::vector<Vec3d> SurfacePositions(const DeformableMesh& mesh,
                                    const std::vector<Vec3d>& y);

// Mean Chamfer between the observed particles of x + delta and z, plus the
// realness energy of x + delta.
double MappingObjective(const DeformableMesh& mesh,
                        const std::vector<Vec3d>& x,
                        const std::vector<Vec3d>& delta, const PointCloud& z,
                        const ConstraintSet& cs, const RealnessWeights& rw);

// Gradient descent on the residual from zero (or `warm` when warm_start).
// Pinned rows stay zero. Restarts with a halved rate when the final
// objective exceeds the initial one. Throws MappingDivergence when the last
// attempt is non-finite.
MappingResult ResidualMap(const DeformableMesh& mesh,
                          const std::vector<Vec3d>& x, const PointCloud& z,
                          const ConstraintSet& cs, const ResidualConfig& cfg,
                          const std::vector<Vec3d>* warm = nullptr);

// Replays the recorded tail of `result` with x on the tape. The returned
// residual has the same values as result.field.delta.
std::vector<Vec3<ad::Var>> TapedResidualTail(
    const DeformableMesh& mesh, const std::vector<Vec3<ad::Var>>& x,
    const PointCloud& z, const ConstraintSet& cs, const ResidualConfig& cfg,
    const MappingResult& result);

}  // namespace simtune

#endif  // SIMTUNE_RESIDUAL_MAPPING_H_
