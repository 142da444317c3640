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

#ifndef SIMTUNE_ONLINE_OPTIMIZER_H_
#define SIMTUNE_ONLINE_OPTIMIZER_H_

#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <vector>

#include "simtune/constraints.h"
#include "simtune/geometry.h"
#include "simtune/residual_mapping.h"
#include "simtune/solver.h"
#include "simtune/stiffness.h"

namespace simtune {

// Guard inside the Frobenius norm so its gradient exists at zero.
inline constexpr double kNormEpsilon = 1e-12;

struct Snapshot {
  std::vector<Vec3d> state;  // corrected state x_h + delta_h
  int frame = 0;
};

// The most recent `capacity` corrected states.
class SnapshotBuffer {
 public:
  explicit SnapshotBuffer(int capacity = 20, int samples = 4);

  void Push(std::vector<Vec3d> state, int frame);
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  int capacity() const { return capacity_; }
  const Snapshot& at(size_t i) const { return items_[i]; }
  // min(samples, size) distinct slots, uniformly without replacement.
  std::vector<size_t> SampleSlots(std::mt19937_64& rng) const;

 private:
  int capacity_;
  int samples_;
  std::deque<Snapshot> items_;
};

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
};

// One Adam update of theta in place; theta is then clipped to
// [-kThetaLimit, kThetaLimit] so mapped stiffness stays inside its bounds.
void AdamStep(OptimizerState& state, std::span<double> theta,
              std::span<const double> grad);

struct LossWeights {
  double gap = 1.0;
  double hist = 1.0;
  double smooth = 1.0;
};

struct OnlineConfig {
  AdamConfig adam;
  LossWeights weights;
  int snapshot_capacity = 20;
  int snapshot_samples = 4;
};

// sqrt(sum |d|^2 + eps^2).
double FrobeniusNorm(const std::vector<Vec3d>& d);
ad::Var FrobeniusNorm(const std::vector<Vec3<ad::Var>>& d);

// Elements whose members are smoothed together: triangles of a shell,
// tetrahedra of a solid.
std::vector<std::vector<int>> SmoothnessElements(const DeformableMesh& mesh);

// (1/2F) sum_f sum_{i,j in f} (k_i - k_j)^2.
double LossSmooth(std::span<const double> k,
                  const std::vector<std::vector<int>>& elements);
std::vector<double> LossSmoothGradient(
    std::span<const double> k, const std::vector<std::vector<int>>& elements);

// One-step drift of a snapshot under zero control.
double LossHistTerm(const DeformableMesh& mesh, const ConstraintSet& cs,
                    const ConstraintWeights<double>& w,
                    const std::vector<Vec3d>& snapshot,
                    const SolverConfig& solver);

struct LossTerms {
  double gap = 0.0;
  double hist = 0.0;
  double smooth = 0.0;
  double total = 0.0;
};

// Everything one frame's loss depends on besides theta.
struct LossProblem {
  const DeformableMesh* mesh = nullptr;
  const ConstraintSet* cs = nullptr;
  const std::vector<Vec3d>* x_prev = nullptr;
  const Control* control = nullptr;
  const PointCloud* z = nullptr;
  std::vector<const std::vector<Vec3d>*> history;
  const std::vector<std::vector<int>>* elements = nullptr;
  SolverConfig solver;
  ResidualConfig residual;
  LossWeights weights;
};

struct LossEvaluation {
  LossTerms terms;
  std::vector<Vec3d> x;  // simulated state before correction
  MappingResult mapping;
  // d total / d theta, distance block then shape block. Empty when the
  // gradient was not requested.
  std::vector<double> grad;
};

LossEvaluation EvaluateLoss(const LossProblem& problem,
                            const StiffnessField& field, bool with_gradient);

struct StatSummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};
StatSummary Summarize(std::span<const double> v);

struct OnlineRecord {
  int frame = 0;
  LossTerms losses;
  StatSummary k_dist;
  StatSummary k_shape;
  MappingReport mapping;
};

struct OnlineStepResult {
  std::vector<Vec3d> x;          // simulated state
  std::vector<Vec3d> delta;      // residual
  std::vector<Vec3d> corrected;  // x + delta
  OnlineRecord record;
};

// Learning half of the per-frame loop; one call per frame.
class OnlineOptimizer {
 public:
  OnlineOptimizer(const DeformableMesh& mesh, const ConstraintSet& cs,
                  StiffnessField field, const OnlineConfig& cfg,
                  uint64_t seed);

  // Steps the estimator from the corrected previous state, maps the
  // residual against z, takes one Adam step on the total loss and pushes the
  // corrected state. On error theta and the optimizer are left unchanged.
  OnlineStepResult Step(const std::vector<Vec3d>& x_prev, const Control& u,
                        const PointCloud& z, int frame,
                        const SolverConfig& solver,
                        const ResidualConfig& residual);

  const StiffnessField& field() const { return field_; }
  const SnapshotBuffer& buffer() const { return buffer_; }
  const OptimizerState& state() const { return state_; }

 private:
  const DeformableMesh& mesh_;
  const ConstraintSet& cs_;
  StiffnessField field_;
  OnlineConfig cfg_;
  OptimizerState state_;
  SnapshotBuffer buffer_;
  std::mt19937_64 rng_;
  std::vector<std::vector<int>> elements_;
};

}  // namespace simtune

#endif  // SIMTUNE_ONLINE_OPTIMIZER_H_
