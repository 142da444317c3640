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

#include "simtune/constraints.h"

#include <algorithm>
#include <set>

#include "simtune/errors.h"

namespace simtune {
namespace {

ShapeCluster MakeCluster(const DeformableMesh& mesh, int center,
                         const std::set<int>& ring) {
  ShapeCluster cl;
  cl.members.push_back(center);
  for (int j : ring) cl.members.push_back(j);
  Vec3d centroid;
  for (int q : cl.members) {
    cl.masses.push_back(mesh.masses[q]);
    cl.total_mass += mesh.masses[q];
    centroid += mesh.rest_positions[q] * mesh.masses[q];
  }
  centroid = centroid / cl.total_mass;
  const double mean_mass = cl.total_mass / cl.members.size();
  Mat3d cov;
  for (size_t k = 0; k < cl.members.size(); ++k) {
    const Vec3d d = mesh.rest_positions[cl.members[k]] - centroid;
    cl.rest_offsets.push_back(d);
    cl.scale.push_back(std::sqrt(cl.masses[k] / mean_mass));
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cov(r, c) += cl.masses[k] * d[r] * d[c];
    }
  }
  const Vec3d n = SmallestEigenvector(cov);
  const double spread = cov(0, 0) + cov(1, 1) + cov(2, 2);
  const double normal_spread = Dot(n, cov * n);
  if (normal_spread <= 1e-12 * spread) {
    cl.planar = true;
    cl.normal = n / Norm(n);
    // Tangent from the largest in-plane offset.
    size_t best = 0;
    double best_len = -1.0;
    for (size_t k = 0; k < cl.rest_offsets.size(); ++k) {
      const Vec3d t = cl.rest_offsets[k] - cl.normal * Dot(cl.rest_offsets[k], cl.normal);
      if (Norm(t) > best_len) {
        best_len = Norm(t);
        best = k;
      }
    }
    const Vec3d t = cl.rest_offsets[best] -
                    cl.normal * Dot(cl.rest_offsets[best], cl.normal);
    cl.tangent_u = t / Norm(t);
    cl.tangent_v = Cross(cl.normal, cl.tangent_u);
  }
  return cl;
}

}  // namespace

size_t ConstraintSet::shape_residual_count() const {
  size_t n = 0;
  for (const auto& cl : shape) n += 3 * cl.members.size();
  return n;
}

Family ConstraintSet::FamilyOf(size_t residual) const {
  if (residual < distance.size()) return Family::kDistance;
  if (residual < distance.size() + volume.size()) return Family::kVolume;
  if (residual < residual_count()) return Family::kShape;
  throw InvalidArgument("residual index out of range");
}

ConstraintSet BuildConstraints(const DeformableMesh& mesh,
                               const ConstraintOptions& opts) {
  ConstraintSet cs;
  cs.num_particles = mesh.size();
  cs.polar = opts.polar;
  const auto& x = mesh.rest_positions;
  if (opts.distance) {
    for (const auto& e : mesh.edges) {
      const double len = Norm(x[e[0]] - x[e[1]]);
      if (!(len > 0.0)) throw InvalidMesh("edge with zero rest length");
      cs.distance.push_back({e[0], e[1], len});
    }
  }
  if (opts.volume) {
    for (const auto& t : mesh.tetrahedra) {
      const double vol = SignedVolume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]);
      if (!(vol > 0.0)) throw InvalidMesh("tetrahedron with non-positive volume");
      cs.volume.push_back({t, vol});
    }
  }
  if (opts.shape) {
    std::vector<std::set<int>> ring(mesh.size());
    for (const auto& e : mesh.edges) {
      ring[e[0]].insert(e[1]);
      ring[e[1]].insert(e[0]);
    }
    int offset = 0;
    for (int p = 0; p < mesh.size(); ++p) {
      if (ring[p].empty()) continue;
      cs.shape.push_back(MakeCluster(mesh, p, ring[p]));
      cs.shape_offset.push_back(offset);
      offset += 3 * static_cast<int>(cs.shape.back().members.size());
    }
  }
  return cs;
}

ConstraintWeights<double> UniformWeights(const ConstraintSet& cs,
                                         double k_dist, double k_vol,
                                         double k_shape) {
  ConstraintWeights<double> w;
  w.distance.assign(cs.distance.size(), k_dist);
  w.volume.assign(cs.volume.size(), k_vol);
  w.shape.assign(cs.shape.size(), k_shape);
  return w;
}

std::vector<JacobianRow> ConstraintJacobian(const ConstraintSet& cs,
                                            const std::vector<Vec3d>& x) {
  std::vector<JacobianRow> rows;
  rows.reserve(cs.residual_count());
  for (const auto& c : cs.distance) {
    const Vec3d dir = LengthAndDirection(x[c.i] - x[c.j]).second;
    rows.push_back({{{c.i, dir}, {c.j, -dir}}});
  }
  for (const auto& c : cs.volume) {
    const auto g =
        TetVolumeGradient(x[c.v[0]], x[c.v[1]], x[c.v[2]], x[c.v[3]]);
    rows.push_back({{{c.v[0], g[0]}, {c.v[1], g[1]}, {c.v[2], g[2]},
                     {c.v[3], g[3]}}});
  }
  // Shape rows depend on every member through the centroid and the fitted
  // rotation; take them from the tape over the cluster.
  for (const auto& cl : cs.shape) {
    ad::Tape tape;
    ad::ScopedTape scope(&tape);
    std::vector<Vec3<ad::Var>> xv = Lift<ad::Var>(x);
    std::vector<ad::Var> inputs;
    for (int q : cl.members) {
      xv[q] = Vec3<ad::Var>(ad::Var::Input(x[q].x), ad::Var::Input(x[q].y),
                            ad::Var::Input(x[q].z));
      inputs.push_back(xv[q].x);
      inputs.push_back(xv[q].y);
      inputs.push_back(xv[q].z);
    }
    const ClusterFrame<ad::Var> f = FitCluster(cl, xv, cs.polar);
    for (size_t k = 0; k < cl.members.size(); ++k) {
      const Vec3<ad::Var> r =
          (xv[cl.members[k]] - ClusterGoal(cl, f, k)) * ad::Var(cl.scale[k]);
      for (int axis = 0; axis < 3; ++axis) {
        const std::vector<double> g = ad::Gradient(tape, r[axis], inputs);
        JacobianRow row;
        for (size_t m = 0; m < cl.members.size(); ++m) {
          row.entries.push_back(
              {cl.members[m], {g[3 * m], g[3 * m + 1], g[3 * m + 2]}});
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace simtune
