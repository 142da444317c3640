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

#ifndef SIMTUNE_CONSTRAINTS_H_
#define SIMTUNE_CONSTRAINTS_H_

#include <array>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "simtune/autodiff.h"
#include "simtune/geometry.h"
#include "simtune/polar.h"
#include "simtune/vec.h"

namespace simtune {

enum class Family { kDistance, kVolume, kShape };

struct DistanceConstraint {
  int i = 0, j = 0;
  double rest_length = 0.0;
};

struct VolumeConstraint {
  std::array<int, 4> v{};
  double rest_volume = 0.0;
};

// A particle and its one-ring. The residual of member q is
// s_q (x_q - c - R d_q) with c the mass-weighted centroid, R the closest
// rotation to A = sum m_q (x_q - c) d_q^T, d_q the rest offset and
// s_q = sqrt(m_q / mean mass) (1 for uniform masses).
struct ShapeCluster {
  std::vector<int> members;
  std::vector<double> masses;
  std::vector<Vec3d> rest_offsets;
  std::vector<double> scale;
  double total_mass = 0.0;
  // Clusters that are flat at rest get their rotation completed from the
  // cross product of the deformed tangents.
  bool planar = false;
  Vec3d tangent_u, tangent_v, normal;
};

struct ConstraintSet {
  int num_particles = 0;
  std::vector<DistanceConstraint> distance;
  std::vector<VolumeConstraint> volume;
  std::vector<ShapeCluster> shape;
  // Index of each cluster's first residual within the shape block.
  std::vector<int> shape_offset;
  PolarOptions polar;

  size_t shape_residual_count() const;
  size_t residual_count() const {
    return distance.size() + volume.size() + shape_residual_count();
  }
  Family FamilyOf(size_t residual) const;
};

struct ConstraintOptions {
  bool distance = true;
  bool volume = true;  // only when the mesh has tetrahedra
  bool shape = true;
  PolarOptions polar;
};

// Distance per edge, volume per tetrahedron, one shape cluster per particle.
ConstraintSet BuildConstraints(const DeformableMesh& mesh,
                               const ConstraintOptions& opts = {});

// Per-constraint stiffness (one value per cluster for shape matching).
template <class T>
struct ConstraintWeights {
  std::vector<T> distance;
  std::vector<T> volume;
  std::vector<T> shape;
};

// Sparse row of dC_i/dx over the constraint's member particles.
struct JacobianRow {
  std::vector<std::pair<int, Vec3d>> entries;
};

std::vector<JacobianRow> ConstraintJacobian(const ConstraintSet& cs,
                                            const std::vector<Vec3d>& x);

ConstraintWeights<double> UniformWeights(const ConstraintSet& cs,
                                         double k_dist, double k_vol,
                                         double k_shape);

// sum_i coeffs[i] * terms[i]; a single tape node for ad::Var.
inline double LinearCombination(std::span<const double> terms,
                                std::span<const double> coeffs) {
  double s = 0.0;
  for (size_t i = 0; i < terms.size(); ++i) s += coeffs[i] * terms[i];
  return s;
}
inline ad::Var LinearCombination(std::span<const ad::Var> terms,
                                 std::span<const double> coeffs) {
  return ad::Linear(terms, coeffs);
}

// Weight of each elastic constraint is the mean of its member particles'
// stiffness; volume constraints take the fixed k_vol.
template <class T>
ConstraintWeights<T> StiffnessToConstraintWeights(const ConstraintSet& cs,
                                                  std::span<const T> k_dist,
                                                  std::span<const T> k_shape,
                                                  double k_vol) {
  ConstraintWeights<T> w;
  w.distance.reserve(cs.distance.size());
  const double half[2] = {0.5, 0.5};
  for (const auto& c : cs.distance) {
    const T pair[2] = {k_dist[c.i], k_dist[c.j]};
    w.distance.push_back(LinearCombination(std::span<const T>(pair, 2), half));
  }
  w.volume.assign(cs.volume.size(), T(k_vol));
  std::vector<T> terms;
  std::vector<double> coeffs;
  for (const auto& cl : cs.shape) {
    terms.clear();
    for (int q : cl.members) terms.push_back(k_shape[q]);
    coeffs.assign(terms.size(), 1.0 / terms.size());
    w.shape.push_back(LinearCombination(std::span<const T>(terms), coeffs));
  }
  return w;
}

// Residual-level weights in ConstraintValues order.
template <class T>
std::vector<T> ExpandWeights(const ConstraintSet& cs,
                             const ConstraintWeights<T>& w) {
  std::vector<T> out;
  out.reserve(cs.residual_count());
  out.insert(out.end(), w.distance.begin(), w.distance.end());
  out.insert(out.end(), w.volume.begin(), w.volume.end());
  for (size_t c = 0; c < cs.shape.size(); ++c) {
    out.insert(out.end(), 3 * cs.shape[c].members.size(), w.shape[c]);
  }
  return out;
}

inline constexpr double kCoincidentLength = 1e-9;

// |d| with a fixed unit direction when the particles coincide.
template <class T>
std::pair<T, Vec3<T>> LengthAndDirection(const Vec3<T>& d) {
  using std::sqrt;
  const double sq = Value(SquaredNorm(d));
  if (std::sqrt(sq) < kCoincidentLength) {
    return {T(std::sqrt(sq)), Vec3<T>(T(1.0), T(0.0), T(0.0))};
  }
  const T len = sqrt(SquaredNorm(d));
  return {len, d / len};
}

template <class T>
T TetVolume(const Vec3<T>& a, const Vec3<T>& b, const Vec3<T>& c,
            const Vec3<T>& d) {
  return Dot(b - a, Cross(c - a, d - a)) / T(6.0);
}

// dV/dx for the four vertices.
template <class T>
std::array<Vec3<T>, 4> TetVolumeGradient(const Vec3<T>& a, const Vec3<T>& b,
                                         const Vec3<T>& c, const Vec3<T>& d) {
  const T sixth(1.0 / 6.0);
  const Vec3<T> ab = b - a, ac = c - a, ad = d - a;
  std::array<Vec3<T>, 4> g;
  g[1] = Cross(ac, ad) * sixth;
  g[2] = Cross(ad, ab) * sixth;
  g[3] = Cross(ab, ac) * sixth;
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

template <class T>
struct ClusterFrame {
  Vec3<T> centroid;
  Mat3<T> rotation;
};

template <class T>
ClusterFrame<T> FitCluster(const ShapeCluster& cl, const std::vector<Vec3<T>>& x,
                           const PolarOptions& polar) {
  using std::sqrt;
  const size_t q = cl.members.size();
  // Scratch reused across calls on the same thread.
  thread_local std::vector<T> comp;
  thread_local std::vector<double> coeff;
  comp.resize(q);
  coeff.resize(q);
  ClusterFrame<T> f;
  Mat3<T> a;
  for (int r = 0; r < 3; ++r) {
    for (size_t k = 0; k < q; ++k) comp[k] = x[cl.members[k]][r];
    for (size_t k = 0; k < q; ++k) coeff[k] = cl.masses[k] / cl.total_mass;
    f.centroid[r] = LinearCombination(std::span<const T>(comp), coeff);
    // sum m d = 0, so A needs no centroid subtraction.
    for (int c = 0; c < 3; ++c) {
      for (size_t k = 0; k < q; ++k) {
        coeff[k] = cl.masses[k] * cl.rest_offsets[k][c];
      }
      a(r, c) = LinearCombination(std::span<const T>(comp), coeff);
    }
  }
  if (cl.planar) {
    const Vec3<T> tu(T(cl.tangent_u.x), T(cl.tangent_u.y), T(cl.tangent_u.z));
    const Vec3<T> tv(T(cl.tangent_v.x), T(cl.tangent_v.y), T(cl.tangent_v.z));
    const Vec3<T> au = a * tu;
    const Vec3<T> av = a * tv;
    const Vec3<T> n = Cross(au, av);
    const T len = sqrt(SquaredNorm(n));
    const T sigma = (sqrt(SquaredNorm(au)) + sqrt(SquaredNorm(av))) * T(0.5);
    const Vec3<T> u = n * (sigma / len);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(r, c) += u[r] * T(cl.normal[c]);
    }
  }
  f.rotation = PolarRotation(a, polar);
  return f;
}

template <class T>
Vec3<T> ClusterGoal(const ShapeCluster& cl, const ClusterFrame<T>& f,
                    size_t k) {
  const Vec3<T> d(T(cl.rest_offsets[k].x), T(cl.rest_offsets[k].y),
                  T(cl.rest_offsets[k].z));
  return f.centroid + f.rotation * d;
}

// Residual vector: distance block, volume block, then 3 per shape member.
template <class T>
std::vector<T> ConstraintValues(const ConstraintSet& cs,
                                const std::vector<Vec3<T>>& x) {
  std::vector<T> out;
  out.reserve(cs.residual_count());
  for (const auto& c : cs.distance) {
    out.push_back(LengthAndDirection(x[c.i] - x[c.j]).first -
                  T(c.rest_length));
  }
  for (const auto& c : cs.volume) {
    out.push_back(TetVolume(x[c.v[0]], x[c.v[1]], x[c.v[2]], x[c.v[3]]) -
                  T(c.rest_volume));
  }
  for (const auto& cl : cs.shape) {
    const ClusterFrame<T> f = FitCluster(cl, x, cs.polar);
    for (size_t k = 0; k < cl.members.size(); ++k) {
      const Vec3<T> r = (x[cl.members[k]] - ClusterGoal(cl, f, k)) *
                        T(cl.scale[k]);
      out.push_back(r.x);
      out.push_back(r.y);
      out.push_back(r.z);
    }
  }
  return out;
}

// U(x) = 1/2 C(x)^T diag(weights) C(x) with residual-level weights.
template <class T>
T Energy(const ConstraintSet& cs, const std::vector<T>& residual_weights,
         const std::vector<Vec3<T>>& x) {
  const std::vector<T> c = ConstraintValues(cs, x);
  T e(0.0);
  for (size_t i = 0; i < c.size(); ++i) {
    if (Value(residual_weights[i]) == 0.0) continue;
    e += residual_weights[i] * c[i] * c[i];
  }
  return e * T(0.5);
}

// dU/dx. Shape-matching rows use the fact that c and R minimize the
// cluster's mass-weighted residual, so only the direct term survives.
template <class T>
std::vector<Vec3<T>> EnergyGradient(const ConstraintSet& cs,
                                    const ConstraintWeights<T>& w,
                                    const std::vector<Vec3<T>>& x) {
  std::vector<Vec3<T>> g(x.size(), Vec3<T>(T(0.0), T(0.0), T(0.0)));
  for (size_t k = 0; k < cs.distance.size(); ++k) {
    if (Value(w.distance[k]) == 0.0) continue;
    const auto& c = cs.distance[k];
    const auto [len, dir] = LengthAndDirection(x[c.i] - x[c.j]);
    const Vec3<T> f = dir * (w.distance[k] * (len - T(c.rest_length)));
    g[c.i] += f;
    g[c.j] -= f;
  }
  for (size_t k = 0; k < cs.volume.size(); ++k) {
    if (Value(w.volume[k]) == 0.0) continue;
    const auto& c = cs.volume[k];
    const auto& a = x[c.v[0]];
    const auto& b = x[c.v[1]];
    const auto& cc = x[c.v[2]];
    const auto& d = x[c.v[3]];
    const T scale = w.volume[k] * (TetVolume(a, b, cc, d) - T(c.rest_volume));
    const auto grad = TetVolumeGradient(a, b, cc, d);
    for (int v = 0; v < 4; ++v) g[c.v[v]] += grad[v] * scale;
  }
  for (size_t k = 0; k < cs.shape.size(); ++k) {
    if (Value(w.shape[k]) == 0.0) continue;
    const auto& cl = cs.shape[k];
    const ClusterFrame<T> f = FitCluster(cl, x, cs.polar);
    for (size_t m = 0; m < cl.members.size(); ++m) {
      const T s2 = w.shape[k] * T(cl.scale[m] * cl.scale[m]);
      g[cl.members[m]] += (x[cl.members[m]] - ClusterGoal(cl, f, m)) * s2;
    }
  }
  return g;
}

}  // namespace simtune

#endif  // SIMTUNE_CONSTRAINTS_H_
