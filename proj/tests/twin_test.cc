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

#include <gtest/gtest.h>

#include <cmath>

#include "simtune/chamfer.h"
#include "simtune/errors.h"
#include "simtune/experiment.h"
#include "simtune/geometry.h"
#include "simtune/twin.h"

namespace simtune {
namespace {

SolverConfig NoGravity() {
  SolverConfig cfg;
  cfg.gravity = {0, 0, 0};
  return cfg;
}

TwinConfig Uniform(const DeformableMesh& m, double kd, double ks) {
  TwinConfig cfg;
  cfg.k_dist.assign(m.size(), kd);
  cfg.k_shape.assign(m.size(), ks);
  return cfg;
}

double PointTriangleDistance(const Vec3d& p, const Vec3d& a, const Vec3d& b, const Vec3d& c) {
  // Barycentric projection; points produced by sampling are inside.
  const Vec3d n = Cross(b - a, c - a);
  return std::abs(Dot(p - a, n)) / Norm(n);
}

TEST(Trajectory, ZeroAmplitudeIsHold) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  for (auto kind : {TrajectoryKind::kEdgePull, TrajectoryKind::kLiftFold, TrajectoryKind::kPoke}) {
    for (const Control& u : ScriptedTrajectory(m, kind, 20, 0.0)) EXPECT_TRUE(u.IsHold());
  }
}

TEST(Trajectory, EdgePullIsMonotoneAndReachesAmplitude) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  const auto traj = ScriptedTrajectory(m, TrajectoryKind::kEdgePull, 100, 0.05);
  ASSERT_EQ(traj.size(), 100u);
  const int g = m.grasped_indices.front();
  double prev = -1.0;
  for (const Control& u : traj) {
    const double d = Norm(u.targets.at(g) - m.rest_positions[g]);
    EXPECT_GE(d, prev);
    prev = d;
  }
  EXPECT_NEAR(prev, 0.05, 1e-12);
}

TEST(Trajectory, PokeReturns) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  const auto traj = ScriptedTrajectory(m, TrajectoryKind::kPoke, 61, 0.05);
  for (int i : m.grasped_indices) {
    EXPECT_EQ(traj.front().targets.at(i), traj.back().targets.at(i));
    EXPECT_NEAR(Norm(traj[30].targets.at(i) - m.rest_positions[i]), 0.05, 1e-12);
  }
}

TEST(Trajectory, Errors) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  EXPECT_THROW(ParseTrajectoryKind("wave"), InvalidArgument);
  EXPECT_THROW(ScriptedTrajectory(m, TrajectoryKind::kPoke, 0, 0.05), InvalidArgument);
  EXPECT_EQ(ParseTrajectoryKind(TrajectoryKindName(TrajectoryKind::kLiftFold)),
            TrajectoryKind::kLiftFold);
}

TEST(CubicEase, Endpoints) {
  EXPECT_EQ(CubicEase(0.0), 0.0);
  EXPECT_EQ(CubicEase(1.0), 1.0);
  EXPECT_DOUBLE_EQ(CubicEase(0.5), 0.5);
}

TEST(Twin, MatchedStiffnessTracksEstimatorExactly) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  TwinConfig cfg = Uniform(m, 1.0, 0.005);
  cfg.trajectory = ScriptedTrajectory(m, TrajectoryKind::kEdgePull, 10, 0.02);
  const Twin twin(m, cfg, NoGravity());
  const ConstraintSet cs = BuildConstraints(m);
  const auto w = StiffnessToConstraintWeights<double>(cs, cfg.k_dist, cfg.k_shape, cfg.k_vol);
  DeformableMesh est = m;
  for (int t = 0; t < 10; ++t) {
    StepMesh(est, cfg.trajectory[t], cs, w, NoGravity());
    EXPECT_EQ(est.positions, twin.state(t + 1)) << t;
  }
}

TEST(Twin, HoldWithoutGravityIsConstant) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  TwinConfig cfg = Uniform(m, 1.0, 0.005);
  cfg.trajectory.resize(20);
  const Twin twin(m, cfg, NoGravity());
  for (int t = 0; t <= 20; ++t) {
    for (int i = 0; i < m.size(); ++i) EXPECT_LT(Norm(twin.state(t)[i] - m.positions[i]), 1e-15);
  }
}

TEST(Twin, SoftHalfDeflectsMore) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  TwinConfig cfg;
  cfg.k_dist = TwoRegionPattern(m, 0.5, 8.0);
  cfg.k_shape.assign(m.size(), 0.002);
  cfg.trajectory = ScriptedTrajectory(m, TrajectoryKind::kEdgePull, 40, 0.05);
  const Twin twin(m, cfg, NoGravity());
  const auto mask = SoftRegionMask(m);
  double soft = 0.0, stiff = 0.0;
  for (int i = 0; i < m.size(); ++i) {
    if (m.IsPinned(i) || m.IsGrasped(i)) continue;
    const double d = Norm(twin.state(40)[i] - m.rest_positions[i]);
    (mask[i] ? soft : stiff) = std::max(mask[i] ? soft : stiff, d);
  }
  EXPECT_GT(soft, stiff);
}

TEST(Twin, RejectsBadConfig) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  TwinConfig cfg = Uniform(m, 1.0, 0.005);
  EXPECT_THROW(Twin(m, cfg, NoGravity()), InvalidArgument);  // empty trajectory
  cfg.trajectory.resize(1);
  cfg.k_dist[3] = 0.0;
  EXPECT_THROW(Twin(m, cfg, NoGravity()), InvalidArgument);
  cfg = Uniform(m, 1.0, 0.005);
  cfg.trajectory.resize(1);
  cfg.noise_sigma = -1.0;
  EXPECT_THROW(Twin(m, cfg, NoGravity()), InvalidArgument);
}

TEST(Observe, NoiselessPointsLieOnSurfaceTriangles) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  TwinConfig cfg = Uniform(m, 1.0, 0.005);
  cfg.trajectory = ScriptedTrajectory(m, TrajectoryKind::kLiftFold, 10, 0.03);
  const Twin twin(m, cfg, NoGravity());
  const auto& x = twin.state(10);
  const PointCloud z = ObserveSurface(m, x, 300, 0.0, 4, 10);
  ASSERT_EQ(z.points.size(), 300u);
  for (const auto& p : z.points) {
    double best = 1e9;
    for (const auto& t : m.triangles) {
      const Vec3d a = x[t[0]], b = x[t[1]], c = x[t[2]];
      // Only triangles whose bounding box contains the point.
      bool inside = true;
      for (int k = 0; k < 3; ++k) {
        const double lo = std::min({a[k], b[k], c[k]}) - 1e-12;
        const double hi = std::max({a[k], b[k], c[k]}) + 1e-12;
        inside = inside && p[k] >= lo && p[k] <= hi;
      }
      if (inside) best = std::min(best, PointTriangleDistance(p, a, b, c));
    }
    EXPECT_LT(best, 1e-9);
  }
}

TEST(Observe, VolumetricSamplesOnlyBoundary) {
  MeshSpec spec;
  spec.type = "volumetric";
  spec.rows = spec.cols = 4;
  spec.layers = 2;
  const DeformableMesh m = BuildMesh(spec);
  const PointCloud z = ObserveSurface(m, m.positions, 2000, 0.0, 1, 0);
  Vec3d lo = m.positions.front(), hi = lo;
  for (const auto& p : m.positions) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  for (const auto& p : z.points) {
    double face = 1e9;
    for (int k = 0; k < 3; ++k) face = std::min({face, std::abs(p[k] - lo[k]), std::abs(p[k] - hi[k])});
    EXPECT_LT(face, 1e-12);
  }
}

TEST(Observe, DeterministicPerSeedAndFrame) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  const auto a = ObserveSurface(m, m.positions, 500, 5e-4, 11, 3);
  EXPECT_EQ(a.points, ObserveSurface(m, m.positions, 500, 5e-4, 11, 3).points);
  EXPECT_NE(a.points, ObserveSurface(m, m.positions, 500, 5e-4, 11, 4).points);
  EXPECT_NE(a.points, ObserveSurface(m, m.positions, 500, 5e-4, 12, 3).points);
  EXPECT_THROW(ObserveSurface(m, m.positions, 0, 0.0, 1, 0), InvalidArgument);
}

TEST(Observe, DensityConvergesToReference) {
  const DeformableMesh m = BuildMesh(MeshSpec{});
  const auto ref = ObserveSurface(m, m.positions, 100000, 0.0, 99, 0).points;
  double prev = 1e9;
  for (int n : {100, 1000, 10000}) {
    const double gap = MeanChamfer(ObserveSurface(m, m.positions, n, 0.0, 7, 0).points, ref);
    EXPECT_LT(gap, prev) << n;
    prev = gap;
  }
}

TEST(Keypoints, HighestDisplacementFirst) {
  const std::vector<Vec3d> from(5);
  std::vector<Vec3d> to(5);
  to[3] = {0, 0, 3};
  to[1] = {0, 2, 0};
  to[4] = {1, 0, 0};
  const auto kp = SelectKeypoints(from, to, 3);
  ASSERT_EQ(kp.size(), 3u);
  EXPECT_EQ(kp[0].weights.front().first, 3);
  EXPECT_EQ(kp[1].weights.front().first, 1);
  EXPECT_EQ(kp[2].weights.front().first, 4);
  EXPECT_EQ(kp[0].At(to), to[3]);
}

TEST(Keypoints, OffsetSitsHalfwayAlongAnEdge) {
  const DeformableMesh m = BuildGridShell(3, 3, 0.01);
  const auto kp = OffsetKeypoints(m, SelectKeypoints(m.positions, m.positions, 9));
  for (const auto& k : kp) {
    ASSERT_EQ(k.weights.size(), 2u);
    const Vec3d a = m.positions[k.weights[0].first], b = m.positions[k.weights[1].first];
    EXPECT_NEAR(Norm(k.At(m.positions) - a), 0.5 * Norm(b - a), 1e-15);
  }
}

}  // namespace
}  // namespace simtune
