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

#include "simtune/gradcheck.h"

#include <chrono>
#include <cmath>
#include <random>

#include "simtune/constraints.h"
#include "simtune/errors.h"
#include "simtune/geometry.h"
#include "simtune/online_optimizer.h"
#include "simtune/solver.h"
#include "simtune/stiffness.h"
#include "simtune/twin.h"

namespace simtune {

GradCheckReport RunGradCheck(const GradCheckConfig& cfg) {
  if (cfg.rows < 2 || cfg.cols < 2) throw InvalidArgument("gradcheck needs at least a 2x2 grid");
  if (!(cfg.step > 0.0)) throw InvalidArgument("gradcheck step must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  DeformableMesh mesh = BuildGridShell(cfg.rows, cfg.cols, 0.01);
  const int n = mesh.size();
  mesh.pinned_indices = {0};
  mesh.grasped_indices = {n - 1};
  const ConstraintSet cs = BuildConstraints(mesh);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  StiffnessField field = StiffnessField::Uniform(n, 2.0, 0.005, StiffnessBounds{});
  for (auto& t : field.theta_dist) t += 0.5 * unit(rng);
  for (auto& t : field.theta_shape) t += 0.5 * unit(rng);

  SolverConfig solver;
  solver.gravity = {0.0, 0.0, 0.0};
  std::vector<Vec3d> x_prev = mesh.positions;
  for (int i = 1; i < n - 1; ++i) {
    x_prev[i] += Vec3d{unit(rng), unit(rng), unit(rng)} * 1e-3;
  }
  std::vector<Vec3d> snapshot = mesh.positions;
  for (int i = 1; i < n - 1; ++i) {
    snapshot[i] += Vec3d{unit(rng), unit(rng), unit(rng)} * 1e-3;
  }
  Control u;
  u.targets[n - 1] = mesh.positions[n - 1] + Vec3d{0.003, 0.0, 0.004};

  // Observation from the same step under a different hidden stiffness.
  const std::vector<double> kd_true(n, 0.5), ks_true(n, 0.002);
  const auto w_true = StiffnessToConstraintWeights<double>(cs, kd_true, ks_true, field.k_vol);
  const std::vector<Vec3d> x_true = PbdStep(mesh, x_prev, u, cs, w_true, solver);
  const PointCloud z = ObserveSurface(mesh, x_true, 50 * n, 0.0, cfg.seed, 1);

  const auto elements = SmoothnessElements(mesh);
  LossProblem prob;
  prob.mesh = &mesh;
  prob.cs = &cs;
  prob.x_prev = &x_prev;
  prob.control = &u;
  prob.z = &z;
  prob.history = {&snapshot};
  prob.elements = &elements;
  prob.solver = solver;
  prob.residual.inner_steps = cfg.inner_steps;
  prob.residual.tape_depth = cfg.inner_steps;
  prob.residual.learning_rate = cfg.mapping_learning_rate;

  const LossEvaluation eval = EvaluateLoss(prob, field, true);
  const std::vector<double>& g = eval.grad;

  std::vector<double> fd(2 * n);
  const auto total_at = [&](int k, double offset) {
    StiffnessField f = field;
    if (k < n) {
      f.theta_dist[k] += offset;
    } else {
      f.theta_shape[k - n] += offset;
    }
    return EvaluateLoss(prob, f, false).terms.total;
  };
  for (int k = 0; k < 2 * n; ++k) {
    fd[k] = (total_at(k, cfg.step) - total_at(k, -cfg.step)) / (2.0 * cfg.step);
  }

  GradCheckReport r;
  r.rows = cfg.rows;
  r.cols = cfg.cols;
  r.parameters = 2 * n;
  double diff = 0.0, norm = 0.0;
  for (int k = 0; k < 2 * n; ++k) {
    diff += (g[k] - fd[k]) * (g[k] - fd[k]);
    norm += fd[k] * fd[k];
  }
  r.gradient_norm = std::sqrt(norm);
  r.relative_error = std::sqrt(diff) / std::max(r.gradient_norm, 1e-300);
  const double floor = 1e-6 * r.gradient_norm;
  for (int k = 0; k < 2 * n; ++k) {
    r.max_component_error =
        std::max(r.max_component_error, std::abs(g[k] - fd[k]) / (std::abs(fd[k]) + floor));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace simtune
