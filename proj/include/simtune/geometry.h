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

#ifndef SIMTUNE_GEOMETRY_H_
#define SIMTUNE_GEOMETRY_H_

#include <array>
#include <functional>
#include <vector>

#include "simtune/vec.h"

namespace simtune {

inline constexpr double kDefaultParticleMass = 0.01;  // kg

enum class MeshKind { kThinShell, kVolumetric };

using Edge = std::array<int, 2>;
using Triangle = std::array<int, 3>;
using Tetrahedron = std::array<int, 4>;

// Particle mesh of a deformable body. For volumetric meshes `triangles`
// holds the outward-oriented boundary faces.
struct DeformableMesh {
  MeshKind kind = MeshKind::kThinShell;
  std::vector<Vec3d> positions;
  std::vector<Vec3d> rest_positions;
  std::vector<Vec3d> velocities;
  std::vector<double> masses;
  std::vector<Edge> edges;
  std::vector<Triangle> triangles;
  std::vector<Tetrahedron> tetrahedra;
  std::vector<int> surface_indices;  // sorted
  std::vector<int> pinned_indices;   // sorted
  std::vector<int> grasped_indices;  // sorted

  int size() const { return static_cast<int>(positions.size()); }
  bool IsPinned(int i) const;
  bool IsGrasped(int i) const;
  // Pinned or grasped: excluded from constraint projection.
  std::vector<bool> KinematicMask() const;
};

struct PointCloud {
  std::vector<Vec3d> points;
  int size() const { return static_cast<int>(points.size()); }
};

// Throws InvalidMesh describing the first violated invariant.
void ValidateMesh(const DeformableMesh& mesh);
// Throws InvalidArgument on an empty cloud or non-finite coordinates.
void ValidatePointCloud(const PointCloud& cloud);

// (1/6) det[b - a, c - a, d - a].
double SignedVolume(const Vec3d& a, const Vec3d& b, const Vec3d& c,
                    const Vec3d& d);
double TriangleArea(const Vec3d& a, const Vec3d& b, const Vec3d& c);

// rows x cols particles in the z = 0 plane, index r * cols + c at
// (c * spacing, r * spacing, 0). Each quad is split along the same diagonal.
DeformableMesh BuildGridShell(int rows, int cols, double spacing);

// Replicates every shell vertex at layers + 1 levels spaced thickness/layers
// apart along -z and splits each prism into three tetrahedra. Pins carry
// through all levels; grasps stay on the top level.
DeformableMesh ExtrudeToVolumetric(const DeformableMesh& shell,
                                   double thickness, int layers);

// Faces that belong to exactly one tetrahedron, oriented outward.
std::vector<Triangle> BoundaryFaces(const std::vector<Tetrahedron>& tets,
                                    const std::vector<Vec3d>& positions);

// Particles touching a boundary face; every particle for a thin shell.
std::vector<int> SurfaceParticleSet(const DeformableMesh& mesh);

// Unique sorted edges of the given elements.
std::vector<Edge> EdgesOfTriangles(const std::vector<Triangle>& tris);
std::vector<Edge> EdgesOfTetrahedra(const std::vector<Tetrahedron>& tets);

// Indices whose rest position satisfies `pred`, sorted.
std::vector<int> IndicesWhere(const DeformableMesh& mesh,
                              const std::function<bool(const Vec3d&)>& pred);

// Total area of `triangles`.
double SurfaceArea(const DeformableMesh& mesh);

}  // namespace simtune

#endif  // SIMTUNE_GEOMETRY_H_
