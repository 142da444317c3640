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

#include "simtune/twin.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "simtune/errors.h"

namespace simtune {

TrajectoryKind ParseTrajectoryKind(const std::string& name) {
  if (name == "edge_pull") return TrajectoryKind::kEdgePull;
  if (name == "lift_fold") return TrajectoryKind::kLiftFold;
  if (name == "poke") return TrajectoryKind::kPoke;
  throw InvalidArgument(fmt::format("unknown trajectory kind '{}'", name));
}

std::string TrajectoryKindName(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kEdgePull: return "edge_pull";
    case TrajectoryKind::kLiftFold: return "lift_fold";
    case TrajectoryKind::kPoke: return "poke";
  }
  return "edge_pull";
}

double CubicEase(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

std::vector<Control> ScriptedTrajectory(const DeformableMesh& mesh,
                                        TrajectoryKind kind, int frames,
                                        double amplitude) {
  if (frames < 1) {
    throw InvalidArgument(fmt::format("frames must be >= 1, got {}", frames));
  }
  if (!std::isfinite(amplitude)) throw InvalidArgument("non-finite amplitude");
  std::vector<Control> out(frames);
  if (amplitude == 0.0) return out;
  Vec3d dir;
  switch (kind) {
    case TrajectoryKind::kEdgePull: dir = {0.6, 0.0, 0.8}; break;
    case TrajectoryKind::kLiftFold: dir = {-0.6, 0.0, 0.8}; break;
    case TrajectoryKind::kPoke: dir = {0.0, 0.0, -1.0}; break;
  }
  dir = dir / Norm(dir);
  for (int k = 0; k < frames; ++k) {
    const double s = frames == 1 ? 1.0 : static_cast<double>(k) / (frames - 1);
    // Poke goes out and back along a triangle profile.
    const double phase =
        kind == TrajectoryKind::kPoke ? 1.0 - std::abs(2.0 * s - 1.0) : s;
    const double d = amplitude * CubicEase(phase);
    for (int i : mesh.grasped_indices) {
      out[k].targets[i] = mesh.rest_positions[i] + dir * d;
    }
  }
  return out;
}

PointCloud ObserveSurface(const DeformableMesh& mesh,
                          const std::vector<Vec3d>& x, int m,
                          double noise_sigma, uint64_t seed, int frame) {
  if (m < 1) throw InvalidArgument("points per frame must be >= 1");
  if (mesh.triangles.empty()) throw InvalidMesh("mesh has no surface triangles");
  std::vector<double> areas;
  areas.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    areas.push_back(TriangleArea(x[t[0]], x[t[1]], x[t[2]]));
  }
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(frame)};
  std::mt19937_64 rng(seq);
  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(m);
  for (int k = 0; k < m; ++k) {
    const auto& t = mesh.triangles[pick(rng)];
    double u = unit(rng), v = unit(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    Vec3d p = x[t[0]] + (x[t[1]] - x[t[0]]) * u + (x[t[2]] - x[t[0]]) * v;
    if (noise_sigma > 0.0) {
      const double nx = noise(rng), ny = noise(rng), nz = noise(rng);
      p += Vec3d(nx, ny, nz) * noise_sigma;
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

Vec3d Keypoint::At(const std::vector<Vec3d>& x) const {
  Vec3d p;
  for (const auto& [i, w] : weights) p += x[i] * w;
  return p;
}

std::vector<Keypoint> SelectKeypoints(const std::vector<Vec3d>& from,
                                      const std::vector<Vec3d>& to,
                                      int count) {
  std::vector<int> order(from.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> disp(from.size());
  for (size_t i = 0; i < from.size(); ++i) disp[i] = Norm(to[i] - from[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return disp[a] > disp[b]; });
  order.resize(std::min<size_t>(std::max(count, 0), order.size()));
  std::vector<Keypoint> out;
  for (int i : order) out.push_back({{{i, 1.0}}});
  return out;
}

std::vector<Keypoint> OffsetKeypoints(const DeformableMesh& mesh,
                                      const std::vector<Keypoint>& keypoints) {
  std::vector<Keypoint> out;
  for (const auto& kp : keypoints) {
    const int i = kp.weights.front().first;
    int partner = -1;
    for (const auto& e : mesh.edges) {
      const int other = e[0] == i ? e[1] : (e[1] == i ? e[0] : -1);
      if (other >= 0 && (partner < 0 || other < partner)) partner = other;
    }
    if (partner < 0) {
      out.push_back(kp);
    } else {
      out.push_back({{{i, 0.5}, {partner, 0.5}}});
    }
  }
  return out;
}

std::vector<bool> SoftRegionMask(const DeformableMesh& mesh) {
  double lo = mesh.rest_positions.front().y, hi = lo;
  for (const auto& p : mesh.rest_positions) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
  }
  const double mid = 0.5 * (lo + hi);
  std::vector<bool> soft(mesh.size());
  for (int i = 0; i < mesh.size(); ++i) soft[i] = mesh.rest_positions[i].y < mid;
  return soft;
}

std::vector<double> TwoRegionPattern(const DeformableMesh& mesh, double soft,
                                     double stiff) {
  const std::vector<bool> mask = SoftRegionMask(mesh);
  std::vector<double> k(mesh.size());
  for (int i = 0; i < mesh.size(); ++i) k[i] = mask[i] ? soft : stiff;
  return k;
}

void ValidateTwinConfig(const DeformableMesh& mesh, const TwinConfig& cfg) {
  if (static_cast<int>(cfg.k_dist.size()) != mesh.size() ||
      static_cast<int>(cfg.k_shape.size()) != mesh.size()) {
    throw InvalidArgument("twin stiffness must have one value per particle");
  }
  for (size_t i = 0; i < cfg.k_dist.size(); ++i) {
    if (!(cfg.k_dist[i] > 0.0) || !(cfg.k_shape[i] > 0.0)) {
      throw InvalidArgument("twin stiffness must be positive");
    }
  }
  if (cfg.points_per_frame < 1) throw InvalidArgument("points_per_frame must be >= 1");
  if (!(cfg.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (cfg.trajectory.empty()) throw InvalidArgument("trajectory is empty");
  for (const auto& u : cfg.trajectory) ValidateControl(mesh, u);
}

Twin::Twin(DeformableMesh mesh, TwinConfig cfg, const SolverConfig& solver,
           const ConstraintOptions& constraint_opts)
    : mesh_(std::move(mesh)), cfg_(std::move(cfg)), solver_(solver) {
  ValidateMesh(mesh_);
  ValidateTwinConfig(mesh_, cfg_);
  if (cfg_.model_mismatch) {
    solver_.dt *= 0.5;
    solver_.iterations *= 4;
  }
  ValidateSolverConfig(solver_);
  cs_ = BuildConstraints(mesh_, constraint_opts);
  weights_ = StiffnessToConstraintWeights<double>(cs_, cfg_.k_dist,
                                                  cfg_.k_shape, cfg_.k_vol);
  DeformableMesh run = mesh_;
  states_.push_back(run.positions);
  for (const Control& u : cfg_.trajectory) {
    StepMesh(run, u, cs_, weights_, solver_);
    states_.push_back(run.positions);
  }
}

PointCloud Twin::Observe(int t) const {
  return ObserveSurface(mesh_, states_.at(t), cfg_.points_per_frame,
                        cfg_.noise_sigma, cfg_.seed, t);
}

std::vector<Vec3d> Twin::StepFrom(const std::vector<Vec3d>& x,
                                  const Control& u) const {
  ValidateControl(mesh_, u);
  return PbdStep(mesh_, x, u, cs_, weights_, solver_);
}

}  // namespace simtune
