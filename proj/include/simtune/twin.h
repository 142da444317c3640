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

#ifndef SIMTUNE_TWIN_H_
#define SIMTUNE_TWIN_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "simtune/constraints.h"
#include "simtune/geometry.h"
#include "simtune/solver.h"

namespace simtune {

enum class TrajectoryKind { kEdgePull, kLiftFold, kPoke };

TrajectoryKind ParseTrajectoryKind(const std::string& name);
std::string TrajectoryKindName(TrajectoryKind kind);

// 3 s^2 - 2 s^3 on [0, 1].
double CubicEase(double s);

// Per-frame targets for every grasped particle: rest position plus
// amplitude * profile * direction. edge_pull moves along (0.6, 0, 0.8),
// lift_fold along (-0.6, 0, 0.8) normalized, poke down -z and back. A zero
// amplitude yields Hold on every frame.
std::vector<Control> ScriptedTrajectory(const DeformableMesh& mesh,
                                        TrajectoryKind kind, int frames,
                                        double amplitude);

// `m` points uniformly by area over mesh.triangles at positions x, plus
// isotropic Gaussian noise. Deterministic in (seed, frame).
PointCloud ObserveSurface(const DeformableMesh& mesh,
                          const std::vector<Vec3d>& x, int m,
                          double noise_sigma, uint64_t seed, int frame);

// A tracked point as a convex combination of particles.
struct Keypoint {
  std::vector<std::pair<int, double>> weights;
  Vec3d At(const std::vector<Vec3d>& x) const;
};

// The `count` particles with the largest displacement between `from` and
// `to` (lower index first on ties).
std::vector<Keypoint> SelectKeypoints(const std::vector<Vec3d>& from,
                                      const std::vector<Vec3d>& to, int count);
// Keypoints moved to the midpoint of an edge leaving each selected particle,
// so they no longer coincide with particles.
std::vector<Keypoint> OffsetKeypoints(const DeformableMesh& mesh,
                                      const std::vector<Keypoint>& keypoints);

// Stiffness `soft` on particles with rest y below the mid-line, `stiff`
// elsewhere.
std::vector<double> TwoRegionPattern(const DeformableMesh& mesh, double soft,
                                     double stiff);
std::vector<bool> SoftRegionMask(const DeformableMesh& mesh);

struct TwinConfig {
  std::vector<double> k_dist;   // hidden per-particle stiffness
  std::vector<double> k_shape;
  double k_vol = 1e10;
  double noise_sigma = 5e-4;
  int points_per_frame = 2000;
  uint64_t seed = 0;
  std::vector<Control> trajectory;
  // Twin integrates with half the time step and four times the iterations.
  bool model_mismatch = false;
};

void ValidateTwinConfig(const DeformableMesh& mesh, const TwinConfig& cfg);

// Hidden-parameter ground truth. The whole trajectory is simulated up
// front: state(0) is the initial pose and state(t) follows control t - 1.
class Twin {
 public:
  Twin(DeformableMesh mesh, TwinConfig cfg, const SolverConfig& solver,
       const ConstraintOptions& constraint_opts = {});

  int frames() const { return static_cast<int>(cfg_.trajectory.size()); }
  const std::vector<Vec3d>& state(int t) const { return states_.at(t); }
  const DeformableMesh& mesh() const { return mesh_; }
  const TwinConfig& config() const { return cfg_; }
  PointCloud Observe(int t) const;

  // One twin step from an arbitrary state with the hidden stiffness.
  std::vector<Vec3d> StepFrom(const std::vector<Vec3d>& x,
                              const Control& u) const;

 private:
  DeformableMesh mesh_;
  TwinConfig cfg_;
  SolverConfig solver_;
  ConstraintSet cs_;
  ConstraintWeights<double> weights_;
  std::vector<std::vector<Vec3d>> states_;
};

}  // namespace simtune

#endif  // SIMTUNE_TWIN_H_
