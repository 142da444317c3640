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

#ifndef SIMTUNE_SOLVER_H_
#define SIMTUNE_SOLVER_H_

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "simtune/constraints.h"
#include "simtune/errors.h"
#include "simtune/geometry.h"
#include "simtune/vec.h"

namespace simtune {

struct SolverConfig {
  double dt = 1.0 / 30.0;
  int iterations = 20;
  Vec3d gravity{0.0, 0.0, -9.81};
  // Zero velocities after every step.
  bool quasi_static = true;
};

void ValidateSolverConfig(const SolverConfig& cfg);

// Target positions for grasped particles. Grasped particles without a
// target hold their current position; an empty map is u = 0.
struct Control {
  std::map<int, Vec3d> targets;
  bool IsHold() const { return targets.empty(); }
};

// Throws InvalidArgument for targets on non-grasped particles or non-finite
// targets.
void ValidateControl(const DeformableMesh& mesh, const Control& u);

// Moves grasped particles to their targets.
void ApplyControl(DeformableMesh& mesh, const Control& u);

namespace internal {

template <class T>
bool AllFinite(const std::vector<Vec3<T>>& x) {
  for (const auto& p : x) {
    if (!std::isfinite(Value(p.x)) || !std::isfinite(Value(p.y)) ||
        !std::isfinite(Value(p.z))) {
      return false;
    }
  }
  return true;
}

// alpha~ = 1 / (k dt^2); zero for infinite stiffness.
template <class T>
T Compliance(const T& k, double dt) {
  if (std::isinf(Value(k))) return T(0.0);
  return T(1.0) / (k * T(dt * dt));
}

}  // namespace internal

// One XPBD step from positions `x` (the mesh supplies rest positions,
// masses, velocities and the particle sets). Constraints are projected
// sequentially: distance, volume, then shape matching. A constraint whose
// weight is not positive is inactive. Returns the new positions.
template <class T>
std::vector<Vec3<T>> PbdStep(const DeformableMesh& mesh,
                             const std::vector<Vec3<T>>& x, const Control& u,
                             const ConstraintSet& cs,
                             const ConstraintWeights<T>& w,
                             const SolverConfig& cfg) {
  const int n = mesh.size();
  const double dt = cfg.dt;
  std::vector<double> inv_mass(n);
  const std::vector<bool> kinematic = mesh.KinematicMask();
  for (int i = 0; i < n; ++i) inv_mass[i] = kinematic[i] ? 0.0 : 1.0 / mesh.masses[i];

  std::vector<Vec3<T>> p(x);
  for (int i = 0; i < n; ++i) {
    if (kinematic[i]) continue;
    const Vec3d drift = mesh.velocities[i] * dt + cfg.gravity * (dt * dt);
    if (drift.x != 0.0 || drift.y != 0.0 || drift.z != 0.0) {
      p[i] += Vec3<T>(T(drift.x), T(drift.y), T(drift.z));
    }
  }
  for (int i : mesh.pinned_indices) {
    const Vec3d& r = mesh.rest_positions[i];
    p[i] = Vec3<T>(T(r.x), T(r.y), T(r.z));
  }
  for (const auto& [i, target] : u.targets) {
    p[i] = Vec3<T>(T(target.x), T(target.y), T(target.z));
  }

  std::vector<T> a_dist(cs.distance.size()), a_vol(cs.volume.size()),
      a_shape(cs.shape.size());
  for (size_t c = 0; c < cs.distance.size(); ++c) {
    if (Value(w.distance[c]) > 0.0) a_dist[c] = internal::Compliance(w.distance[c], dt);
  }
  for (size_t c = 0; c < cs.volume.size(); ++c) {
    if (Value(w.volume[c]) > 0.0) a_vol[c] = internal::Compliance(w.volume[c], dt);
  }
  for (size_t c = 0; c < cs.shape.size(); ++c) {
    if (Value(w.shape[c]) > 0.0) a_shape[c] = internal::Compliance(w.shape[c], dt);
  }

  std::vector<T> l_dist(cs.distance.size()), l_vol(cs.volume.size()),
      l_shape(cs.shape_residual_count());
  for (int it = 0; it < cfg.iterations; ++it) {
    for (size_t c = 0; c < cs.distance.size(); ++c) {
      if (!(Value(w.distance[c]) > 0.0)) continue;
      const auto& con = cs.distance[c];
      const double wi = inv_mass[con.i], wj = inv_mass[con.j];
      if (wi + wj == 0.0) continue;
      const auto [len, dir] = LengthAndDirection(p[con.i] - p[con.j]);
      const T cval = len - T(con.rest_length);
      const T dl = -(cval + a_dist[c] * l_dist[c]) / (T(wi + wj) + a_dist[c]);
      l_dist[c] += dl;
      if (wi != 0.0) p[con.i] += dir * (dl * T(wi));
      if (wj != 0.0) p[con.j] -= dir * (dl * T(wj));
    }
    for (size_t c = 0; c < cs.volume.size(); ++c) {
      if (!(Value(w.volume[c]) > 0.0)) continue;
      const auto& con = cs.volume[c];
      const auto& v = con.v;
      const auto grad = TetVolumeGradient(p[v[0]], p[v[1]], p[v[2]], p[v[3]]);
      T wsum(0.0);
      for (int k = 0; k < 4; ++k) {
        if (inv_mass[v[k]] != 0.0) wsum += T(inv_mass[v[k]]) * SquaredNorm(grad[k]);
      }
      if (Value(wsum) == 0.0) continue;
      const T cval = TetVolume(p[v[0]], p[v[1]], p[v[2]], p[v[3]]) - T(con.rest_volume);
      const T dl = -(cval + a_vol[c] * l_vol[c]) / (wsum + a_vol[c]);
      l_vol[c] += dl;
      for (int k = 0; k < 4; ++k) {
        if (inv_mass[v[k]] != 0.0) p[v[k]] += grad[k] * (dl * T(inv_mass[v[k]]));
      }
    }
    for (size_t c = 0; c < cs.shape.size(); ++c) {
      if (!(Value(w.shape[c]) > 0.0)) continue;
      const auto& cl = cs.shape[c];
      // Goals are fitted once per cluster visit and held fixed while its
      // members are projected.
      const ClusterFrame<T> f = FitCluster(cl, p, cs.polar);
      for (size_t k = 0; k < cl.members.size(); ++k) {
        const int q = cl.members[k];
        const double wq = inv_mass[q];
        if (wq == 0.0) continue;
        const Vec3<T> goal = ClusterGoal(cl, f, k);
        const double s = cl.scale[k];
        const T denom = T(wq * s * s) + a_shape[c];
        for (int axis = 0; axis < 3; ++axis) {
          T& lambda = l_shape[cs.shape_offset[c] + 3 * k + axis];
          const T cval = (p[q][axis] - goal[axis]) * T(s);
          const T dl = -(cval + a_shape[c] * lambda) / denom;
          lambda += dl;
          p[q][axis] += dl * T(wq * s);
        }
      }
    }
    if (!internal::AllFinite(p)) {
      throw SolverDivergence(it, "non-finite positions after projection");
    }
  }
  return p;
}

// Untaped step that advances mesh.positions (and velocities unless
// quasi-static) in place.
void StepMesh(DeformableMesh& mesh, const Control& u, const ConstraintSet& cs,
              const ConstraintWeights<double>& w, const SolverConfig& cfg);

}  // namespace simtune

#endif  // SIMTUNE_SOLVER_H_
