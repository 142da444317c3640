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

#include "simtune/solver.h"

#include <fmt/format.h>

namespace simtune {

void ValidateSolverConfig(const SolverConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw InvalidArgument(fmt::format("dt must be positive, got {}", cfg.dt));
  }
  if (cfg.iterations < 1) {
    throw InvalidArgument(
        fmt::format("iterations must be >= 1, got {}", cfg.iterations));
  }
}

void ValidateControl(const DeformableMesh& mesh, const Control& u) {
  for (const auto& [i, target] : u.targets) {
    if (i < 0 || i >= mesh.size() || !mesh.IsGrasped(i)) {
      throw InvalidArgument(
          fmt::format("control target for non-grasped particle {}", i));
    }
    if (!std::isfinite(target.x) || !std::isfinite(target.y) ||
        !std::isfinite(target.z)) {
      throw InvalidArgument(
          fmt::format("non-finite control target for particle {}", i));
    }
  }
}

void ApplyControl(DeformableMesh& mesh, const Control& u) {
  ValidateControl(mesh, u);
  for (const auto& [i, target] : u.targets) mesh.positions[i] = target;
}

void StepMesh(DeformableMesh& mesh, const Control& u, const ConstraintSet& cs,
              const ConstraintWeights<double>& w, const SolverConfig& cfg) {
  ValidateSolverConfig(cfg);
  ValidateControl(mesh, u);
  std::vector<Vec3d> next = PbdStep(mesh, mesh.positions, u, cs, w, cfg);
  if (cfg.quasi_static) {
    for (auto& v : mesh.velocities) v = Vec3d();
  } else {
    for (int i = 0; i < mesh.size(); ++i) {
      mesh.velocities[i] = (next[i] - mesh.positions[i]) / cfg.dt;
    }
  }
  mesh.positions = std::move(next);
}

}  // namespace simtune
