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

#include "simtune/residual_mapping.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "simtune/errors.h"

namespace simtune {
namespace {

// offset + ca * a + cb * b, evaluated in the same order for both scalars so
// taped replays match the plain run bit for bit.
inline double Affine2(double a, double ca, double b, double cb, double offset) {
  double v = offset;
  v += ca * a;
  v += cb * b;
  return v;
}
inline ad::Var Affine2(const ad::Var& a, double ca, const ad::Var& b,
                       double cb, double offset) {
  const ad::Var terms[2] = {a, b};
  const double coeffs[2] = {ca, cb};
  return ad::Linear(terms, coeffs, offset);
}

bool HasEnergy(const RealnessWeights& rw) {
  return rw.distance > 0.0 || rw.volume > 0.0 || rw.shape > 0.0;
}

template <class T>
ConstraintWeights<T> LiftWeights(const ConstraintWeights<double>& w) {
  ConstraintWeights<T> out;
  out.distance.assign(w.distance.begin(), w.distance.end());
  out.volume.assign(w.volume.begin(), w.volume.end());
  out.shape.assign(w.shape.begin(), w.shape.end());
  return out;
}

// One plain gradient-descent update of delta in place.
template <class T>
void DescentStep(const DeformableMesh& mesh, const std::vector<Vec3<T>>& x,
                 std::vector<Vec3<T>>& delta, const PointCloud& z,
                 const KdTree& z_tree, const ConstraintSet& cs,
                 const ConstraintWeights<T>& wr, bool energy, double lr) {
  const size_t n = x.size();
  std::vector<Vec3<T>> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = x[i] + delta[i];

  const std::vector<int>& surface = mesh.surface_indices;
  std::vector<Vec3d> ys(surface.size());
  for (size_t s = 0; s < surface.size(); ++s) ys[s] = ValueOf(y[surface[s]]);
  // Assignments are fixed here and treated as constants by the tape.
  const ChamferMatch match = MatchClouds(ys, z.points, z_tree);

  std::vector<Vec3<T>> grad =
      energy ? EnergyGradient(cs, wr, y)
             : std::vector<Vec3<T>>(n, Vec3<T>(T(0.0), T(0.0), T(0.0)));
  const double ns = static_cast<double>(surface.size());
  const double m = static_cast<double>(z.size());
  std::vector<int> count(surface.size(), 0);
  std::vector<Vec3d> sum_z(surface.size());
  for (size_t j = 0; j < match.b_to_a.size(); ++j) {
    ++count[match.b_to_a[j]];
    sum_z[match.b_to_a[j]] += z.points[j];
  }
  for (size_t s = 0; s < surface.size(); ++s) {
    const int p = surface[s];
    const Vec3d& nn = z.points[match.a_to_b[s]];
    const double coeff = 2.0 / ns + 2.0 * count[s] / m;
    for (int a = 0; a < 3; ++a) {
      const double offset = -2.0 / ns * nn[a] - 2.0 / m * sum_z[s][a];
      grad[p][a] = Affine2(grad[p][a], 1.0, y[p][a], coeff, offset);
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (mesh.IsPinned(static_cast<int>(i))) {
      delta[i] = Vec3<T>(T(0.0), T(0.0), T(0.0));
      continue;
    }
    for (int a = 0; a < 3; ++a) {
      delta[i][a] = Affine2(delta[i][a], 1.0, grad[i][a], -lr, 0.0);
    }
  }
}

bool AllFinite(const std::vector<Vec3d>& v) {
  for (const auto& p : v) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      return false;
    }
  }
  return true;
}

}  // namespace

void ValidateResidualConfig(const ResidualConfig& cfg) {
  if (cfg.inner_steps < 1) {
    throw InvalidArgument(
        fmt::format("inner_steps must be >= 1, got {}", cfg.inner_steps));
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw InvalidArgument(fmt::format("learning_rate must be positive, got {}",
                                      cfg.learning_rate));
  }
  const auto& rw = cfg.realness;
  if (!(rw.distance >= 0.0 && rw.volume >= 0.0 && rw.shape >= 0.0)) {
    throw InvalidArgument("realness weights must be non-negative");
  }
  if (cfg.max_restarts < 0 || cfg.tape_depth < 0) {
    throw InvalidArgument("max_restarts and tape_depth must be non-negative");
  }
}

ConstraintWeights<double> RealnessConstraintWeights(const ConstraintSet& cs,
                                                    const RealnessWeights& rw) {
  return UniformWeights(cs, rw.distance, rw.volume, rw.shape);
}

double PhysicalRealness(const ConstraintSet& cs,
                        const ConstraintWeights<double>& k_prime,
                        const std::vector<Vec3d>& x) {
  return Energy(cs, ExpandWeights(cs, k_prime), x);
}

std::vector<Vec3d> SurfacePositions(const DeformableMesh& mesh,
                                    const std::vector<Vec3d>& y) {
  std::vector<Vec3d> out;
  out.reserve(mesh.surface_indices.size());
  for (int i : mesh.surface_indices) out.push_back(y[i]);
  return out;
}

double MappingObjective(const DeformableMesh& mesh,
                        const std::vector<Vec3d>& x,
                        const std::vector<Vec3d>& delta, const PointCloud& z,
                        const ConstraintSet& cs, const RealnessWeights& rw) {
  std::vector<Vec3d> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] + delta[i];
  double obj = MeanChamfer(SurfacePositions(mesh, y), z.points);
  if (HasEnergy(rw)) {
    obj += PhysicalRealness(cs, RealnessConstraintWeights(cs, rw), y);
  }
  return obj;
}

MappingResult ResidualMap(const DeformableMesh& mesh,
                          const std::vector<Vec3d>& x, const PointCloud& z,
                          const ConstraintSet& cs, const ResidualConfig& cfg,
                          const std::vector<Vec3d>* warm) {
  ValidateResidualConfig(cfg);
  ValidatePointCloud(z);
  if (mesh.surface_indices.empty()) {
    throw InvalidArgument("mesh has no observed surface particles");
  }
  std::vector<Vec3d> start(x.size());
  if (cfg.warm_start && warm != nullptr && warm->size() == x.size()) {
    start = *warm;
    for (int i : mesh.pinned_indices) start[i] = Vec3d();
  }
  const KdTree z_tree(z.points);
  const ConstraintWeights<double> wr = RealnessConstraintWeights(cs, cfg.realness);
  const bool energy = HasEnergy(cfg.realness);
  const int tail_step = std::max(0, cfg.inner_steps - cfg.tape_depth);

  MappingResult result;
  result.report.initial_objective =
      MappingObjective(mesh, x, start, z, cs, cfg.realness);
  if (!std::isfinite(result.report.initial_objective)) {
    throw MappingDivergence("non-finite mapping objective at the start");
  }
  double lr = cfg.learning_rate;
  bool last_finite = true;
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    std::vector<Vec3d> delta = start;
    std::vector<Vec3d> tail = start;
    bool finite = true;
    for (int k = 0; k < cfg.inner_steps; ++k) {
      if (k == tail_step) tail = delta;
      DescentStep(mesh, x, delta, z, z_tree, cs, wr, energy, lr);
      if (!AllFinite(delta)) {
        finite = false;
        break;
      }
    }
    if (tail_step >= cfg.inner_steps) tail = delta;
    double final_obj = std::numeric_limits<double>::quiet_NaN();
    if (finite) final_obj = MappingObjective(mesh, x, delta, z, cs, cfg.realness);
    last_finite = std::isfinite(final_obj);
    if (last_finite && final_obj <= result.report.initial_objective) {
      result.field.delta = std::move(delta);
      result.tail_start = std::move(tail);
      result.report.final_objective = final_obj;
      result.report.learning_rate = lr;
      result.report.restarts = attempt;
      return result;
    }
    lr *= 0.5;
  }
  if (!last_finite) {
    throw MappingDivergence(fmt::format(
        "mapping objective non-finite after {} restarts; reduce the learning "
        "rate (last tried {})",
        cfg.max_restarts, 2.0 * lr));
  }
  result.field.delta = start;
  result.tail_start = start;
  result.report.final_objective = result.report.initial_objective;
  result.report.learning_rate = 0.0;
  result.report.restarts = cfg.max_restarts;
  result.report.fallback = true;
  return result;
}

std::vector<Vec3<ad::Var>> TapedResidualTail(
    const DeformableMesh& mesh, const std::vector<Vec3<ad::Var>>& x,
    const PointCloud& z, const ConstraintSet& cs, const ResidualConfig& cfg,
    const MappingResult& result) {
  std::vector<Vec3<ad::Var>> delta = Lift<ad::Var>(result.tail_start);
  if (result.report.fallback) return delta;
  const KdTree z_tree(z.points);
  const ConstraintWeights<ad::Var> wr =
      LiftWeights<ad::Var>(RealnessConstraintWeights(cs, cfg.realness));
  const bool energy = HasEnergy(cfg.realness);
  const int tail_step = std::max(0, cfg.inner_steps - cfg.tape_depth);
  for (int k = tail_step; k < cfg.inner_steps; ++k) {
    DescentStep(mesh, x, delta, z, z_tree, cs, wr, energy,
                result.report.learning_rate);
  }
  return delta;
}

}  // namespace simtune
