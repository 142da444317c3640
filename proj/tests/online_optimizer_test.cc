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
#include <random>
#include <set>

#include "simtune/constraints.h"
#include "simtune/geometry.h"
#include "simtune/online_optimizer.h"
#include "simtune/twin.h"
#include "test_util.h"

namespace simtune {
namespace {

SolverConfig NoGravity() {
  SolverConfig cfg;
  cfg.gravity = {0, 0, 0};
  return cfg;
}

TEST(LossSmooth, UniformIsZero) {
  const DeformableMesh m = BuildGridShell(4, 4, 0.01);
  const std::vector<double> k(16, 2.5);
  EXPECT_EQ(LossSmooth(k, SmoothnessElements(m)), 0.0);
}

TEST(LossSmooth, SingleTriangle) {
  const std::vector<std::vector<int>> tri{{0, 1, 2}};
  EXPECT_DOUBLE_EQ(LossSmooth(std::vector<double>{1, 1, 2}, tri), 2.0);
}

TEST(LossSmooth, QuadraticInDifferences) {
  std::mt19937_64 rng(1);
  const DeformableMesh m = ExtrudeToVolumetric(BuildGridShell(3, 3, 0.01), 0.01, 1);
  const auto el = SmoothnessElements(m);
  EXPECT_EQ(el.size(), m.tetrahedra.size());
  std::uniform_real_distribution<double> u(0, 5);
  std::vector<double> k(m.size()), k2(m.size());
  for (auto& v : k) v = u(rng);
  for (size_t i = 0; i < k.size(); ++i) k2[i] = 3.0 + 2.0 * (k[i] - 3.0);
  EXPECT_NEAR(LossSmooth(k2, el), 4.0 * LossSmooth(k, el), 1e-12);
}

TEST(LossSmooth, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  const DeformableMesh m = BuildGridShell(4, 4, 0.01);
  const auto el = SmoothnessElements(m);
  std::uniform_real_distribution<double> u(0, 5);
  std::vector<double> k(m.size());
  for (auto& v : k) v = u(rng);
  const auto g = LossSmoothGradient(k, el);
  for (int i = 0; i < m.size(); ++i) {
    auto p = k, q = k;
    p[i] += 1e-6;
    q[i] -= 1e-6;
    EXPECT_NEAR(g[i], (LossSmooth(p, el) - LossSmooth(q, el)) / 2e-6, 1e-7);
  }
}

TEST(FrobeniusNorm, Homogeneous) {
  std::mt19937_64 rng(3);
  std::vector<Vec3d> d(20), d2(20);
  for (int i = 0; i < 20; ++i) {
    d[i] = testing::RandomVec(rng, 0.001);
    d2[i] = d[i] * 2.0;
  }
  EXPECT_NEAR(FrobeniusNorm(d2), 2.0 * FrobeniusNorm(d), 1e-15);
  EXPECT_NEAR(FrobeniusNorm(std::vector<Vec3d>(3)), kNormEpsilon, 1e-30);
}

TEST(LossHist, RestSnapshotIsZero) {
  DeformableMesh m = BuildGridShell(4, 4, 0.01);
  m.pinned_indices = {0};
  const ConstraintSet cs = BuildConstraints(m);
  const auto w = UniformWeights(cs, 2.0, 1e10, 0.01);
  // Only the norm's epsilon floor remains.
  EXPECT_NEAR(LossHistTerm(m, cs, w, m.positions, NoGravity()), 0.0, 2 * kNormEpsilon);
}

// A state the solver has settled scores far below one still in motion.
TEST(LossHist, SettledStateScoresLow) {
  DeformableMesh m = BuildGridShell(4, 4, 0.01);
  m.pinned_indices = {0, 4, 8, 12};
  m.grasped_indices = {15};
  const ConstraintSet cs = BuildConstraints(m);
  const auto w = UniformWeights(cs, 2.0, 1e10, 0.01);
  Control u;
  u.targets[15] = m.positions[15] + Vec3d(0.002, 0, 0.003);
  std::vector<Vec3d> x = m.positions;
  x[15] = u.targets[15];
  const double moving = LossHistTerm(m, cs, w, x, NoGravity());
  for (int t = 0; t < 400; ++t) x = PbdStep(m, x, Control{}, cs, w, NoGravity());
  EXPECT_LT(LossHistTerm(m, cs, w, x, NoGravity()), 1e-2 * moving);
}

TEST(LossHist, GrowsWithStiffnessOnStretchedEdge) {
  DeformableMesh m = testing::PointMesh({{0, 0, 0}, {1, 0, 0}}, {{0, 1}}, 1.0);
  m.pinned_indices = {0};
  ConstraintOptions opts;
  opts.shape = false;
  const ConstraintSet cs = BuildConstraints(m, opts);
  const std::vector<Vec3d> snap{{0, 0, 0}, {1.5, 0, 0}};
  SolverConfig cfg = NoGravity();
  cfg.iterations = 1;
  double prev = 0.0;
  for (double k : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
    const double v = LossHistTerm(m, cs, UniformWeights(cs, k, 0, 0), snap, cfg);
    EXPECT_GT(v, prev) << k;
    prev = v;
  }
}

TEST(Adam, ZeroGradientLeavesThetaUnchanged) {
  OptimizerState s;
  std::vector<double> theta{0.3, -1.2, 4.0};
  const auto before = theta;
  const std::vector<double> g(3, 0.0);
  for (int i = 0; i < 10; ++i) AdamStep(s, theta, g);
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += (theta[i] - before[i]) * (theta[i] - before[i]);
  EXPECT_LT(std::sqrt(d), 1e-9);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  OptimizerState s;
  std::vector<double> theta{0.0, 0.0};
  AdamStep(s, theta, std::vector<double>{3.0, -0.5});
  EXPECT_NEAR(theta[0], -0.1, 1e-8);
  EXPECT_NEAR(theta[1], 0.1, 1e-7);
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, AdversarialStepsStayInBounds) {
  OptimizerState s;
  s.config.learning_rate = 5.0;
  StiffnessField f = StiffnessField::Uniform(6, 1.0, 0.01);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> theta(12), g(12);
  for (int step = 0; step < 10000; ++step) {
    for (auto& v : g) v = step % 1000 < 500 ? 1e6 : -u(rng);
    AdamStep(s, theta, g);
  }
  for (int i = 0; i < 6; ++i) {
    f.theta_dist[i] = theta[i];
    f.theta_shape[i] = theta[6 + i];
  }
  for (double k : f.KDist()) {
    EXPECT_GT(k, 0.0);
    EXPECT_LT(k, 10.0);
  }
  for (double k : f.KShape()) {
    EXPECT_GT(k, 0.0);
    EXPECT_LT(k, 0.02);
  }
}

TEST(SnapshotBuffer, KeepsMostRecent) {
  SnapshotBuffer b(3, 2);
  for (int f = 0; f < 5; ++f) b.Push({Vec3d(f, 0, 0)}, f);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b.at(0).frame, 2);
  EXPECT_EQ(b.at(2).frame, 4);
}

TEST(SnapshotBuffer, SamplesDistinctSlotsDeterministically) {
  SnapshotBuffer b(20, 4);
  EXPECT_TRUE(b.SampleSlots(*std::make_unique<std::mt19937_64>(1)).empty());
  for (int f = 0; f < 20; ++f) b.Push({}, f);
  std::mt19937_64 r1(7), r2(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = b.SampleSlots(r1);
    EXPECT_EQ(a, b.SampleSlots(r2));
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(std::set<size_t>(a.begin(), a.end()).size(), 4u);
    for (size_t s : a) EXPECT_LT(s, 20u);
  }
}

struct Frame {
  DeformableMesh mesh = BuildGridShell(4, 4, 0.01);
  ConstraintSet cs;
  std::vector<Vec3d> x_prev;
  Control u;
  std::vector<std::vector<int>> elements;
  Frame() {
    mesh.pinned_indices = {0, 4, 8, 12};
    mesh.grasped_indices = {15};
    cs = BuildConstraints(mesh);
    x_prev = mesh.positions;
    u.targets[15] = mesh.positions[15] + Vec3d(0.002, 0, 0.004);
    elements = SmoothnessElements(mesh);
  }
  LossProblem Problem(const PointCloud* z) const {
    LossProblem p;
    p.mesh = &mesh;
    p.cs = &cs;
    p.x_prev = &x_prev;
    p.control = &u;
    p.z = z;
    p.elements = &elements;
    p.solver = NoGravity();
    return p;
  }
};

TEST(EvaluateLoss, PerfectObservationHasSmallGap) {
  Frame fr;
  const StiffnessField field = StiffnessField::Uniform(16, 1.0, 0.005);
  const auto w = StiffnessToConstraintWeights<double>(fr.cs, field.KDist(), field.KShape(),
                                                       field.k_vol);
  const PointCloud z{PbdStep(fr.mesh, fr.x_prev, fr.u, fr.cs, w, NoGravity())};
  LossProblem p = fr.Problem(&z);
  p.residual.realness = {0, 0, 0};
  const LossEvaluation e = EvaluateLoss(p, field, true);
  EXPECT_LT(e.terms.gap, 1e-6);
  EXPECT_EQ(e.terms.smooth, 0.0);
  EXPECT_EQ(e.terms.hist, 0.0);  // empty history
  EXPECT_EQ(e.grad.size(), 32u);
  EXPECT_DOUBLE_EQ(e.terms.total, e.terms.gap + e.terms.hist + e.terms.smooth);
}

TEST(EvaluateLoss, WeightsScaleTerms) {
  Frame fr;
  std::mt19937_64 rng(5);
  const PointCloud z{testing::Perturbed(fr.mesh.positions, rng, 0.001)};
  const auto snap = testing::Perturbed(fr.mesh.positions, rng, 0.001);
  StiffnessField field = StiffnessField::Uniform(16, 1.0, 0.005);
  field.theta_dist[3] = 1.0;
  LossProblem p = fr.Problem(&z);
  p.history = {&snap};
  const LossEvaluation a = EvaluateLoss(p, field, false);
  p.weights = {2.0, 3.0, 5.0};
  const LossEvaluation b = EvaluateLoss(p, field, false);
  EXPECT_TRUE(a.grad.empty());
  EXPECT_NEAR(b.terms.total, 2 * a.terms.gap + 3 * a.terms.hist + 5 * a.terms.smooth,
              1e-12 * b.terms.total);
}

TEST(OnlineOptimizer, StepRecordsAndPushesSnapshot) {
  Frame fr;
  std::mt19937_64 rng(6);
  const PointCloud z{testing::Perturbed(fr.mesh.positions, rng, 0.001)};
  OnlineOptimizer opt(fr.mesh, fr.cs, StiffnessField::Uniform(16, 1.0, 0.005), OnlineConfig{}, 1);
  const auto theta0 = opt.field().theta_dist;
  const OnlineStepResult r = opt.Step(fr.x_prev, fr.u, z, 1, NoGravity(), ResidualConfig{});
  EXPECT_EQ(opt.buffer().size(), 1u);
  EXPECT_EQ(opt.buffer().at(0).state, r.corrected);
  EXPECT_EQ(opt.state().step, 1);
  EXPECT_NE(opt.field().theta_dist, theta0);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(r.corrected[i], r.x[i] + r.delta[i]);
  EXPECT_EQ(r.record.frame, 1);
}

}  // namespace
}  // namespace simtune
