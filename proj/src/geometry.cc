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

#include "simtune/geometry.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "simtune/errors.h"

namespace simtune {
namespace {

bool Contains(const std::vector<int>& sorted, int i) {
  return std::binary_search(sorted.begin(), sorted.end(), i);
}

void CheckSortedUnique(const std::vector<int>& v, int n, const char* name) {
  for (size_t k = 0; k < v.size(); ++k) {
    if (v[k] < 0 || v[k] >= n) {
      throw InvalidMesh(
          fmt::format("{}[{}] = {} out of range [0, {})", name, k, v[k], n));
    }
    if (k > 0 && v[k] <= v[k - 1]) {
      throw InvalidMesh(fmt::format("{} is not sorted and unique", name));
    }
  }
}

template <size_t N>
void CheckIndices(const std::vector<std::array<int, N>>& elems, int n,
                  const char* name) {
  for (size_t k = 0; k < elems.size(); ++k) {
    for (int idx : elems[k]) {
      if (idx < 0 || idx >= n) {
        throw InvalidMesh(fmt::format("{}[{}] references particle {} out of "
                                      "range [0, {})",
                                      name, k, idx, n));
      }
    }
  }
}

}  // namespace

bool DeformableMesh::IsPinned(int i) const { return Contains(pinned_indices, i); }

bool DeformableMesh::IsGrasped(int i) const {
  return Contains(grasped_indices, i);
}

std::vector<bool> DeformableMesh::KinematicMask() const {
  std::vector<bool> mask(positions.size(), false);
  for (int i : pinned_indices) mask[i] = true;
  for (int i : grasped_indices) mask[i] = true;
  return mask;
}

double SignedVolume(const Vec3d& a, const Vec3d& b, const Vec3d& c,
                    const Vec3d& d) {
  return Dot(b - a, Cross(c - a, d - a)) / 6.0;
}

double TriangleArea(const Vec3d& a, const Vec3d& b, const Vec3d& c) {
  return 0.5 * Norm(Cross(b - a, c - a));
}

void ValidateMesh(const DeformableMesh& mesh) {
  const int n = mesh.size();
  if (n == 0) throw InvalidMesh("mesh has no particles");
  if (static_cast<int>(mesh.rest_positions.size()) != n ||
      static_cast<int>(mesh.velocities.size()) != n ||
      static_cast<int>(mesh.masses.size()) != n) {
    throw InvalidMesh("per-particle arrays disagree in length");
  }
  for (int i = 0; i < n; ++i) {
    if (!(mesh.masses[i] > 0.0) || !std::isfinite(mesh.masses[i])) {
      throw InvalidMesh(fmt::format("mass[{}] must be positive", i));
    }
    const Vec3d& p = mesh.positions[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw InvalidMesh(fmt::format("position[{}] is not finite", i));
    }
  }
  CheckIndices(mesh.edges, n, "edges");
  CheckIndices(mesh.triangles, n, "triangles");
  CheckIndices(mesh.tetrahedra, n, "tetrahedra");
  for (size_t k = 0; k < mesh.edges.size(); ++k) {
    if (mesh.edges[k][0] == mesh.edges[k][1]) {
      throw InvalidMesh(fmt::format("edges[{}] is a self loop", k));
    }
  }
  CheckSortedUnique(mesh.surface_indices, n, "surface");
  CheckSortedUnique(mesh.pinned_indices, n, "pinned");
  CheckSortedUnique(mesh.grasped_indices, n, "grasped");
  for (int i : mesh.pinned_indices) {
    if (Contains(mesh.grasped_indices, i)) {
      throw InvalidMesh(fmt::format("particle {} is both pinned and grasped", i));
    }
  }
  if (mesh.kind == MeshKind::kThinShell) {
    if (!mesh.tetrahedra.empty()) {
      throw InvalidMesh("thin-shell mesh must not have tetrahedra");
    }
    if (static_cast<int>(mesh.surface_indices.size()) != n) {
      throw InvalidMesh("thin-shell surface must contain every particle");
    }
  } else {
    if (mesh.tetrahedra.empty()) {
      throw InvalidMesh("volumetric mesh needs tetrahedra");
    }
    for (size_t k = 0; k < mesh.tetrahedra.size(); ++k) {
      const auto& t = mesh.tetrahedra[k];
      const auto& x = mesh.rest_positions;
      if (!(SignedVolume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]) > 0.0)) {
        throw InvalidMesh(fmt::format(
            "tetrahedra[{}] has non-positive rest volume", k));
      }
    }
  }
}

void ValidatePointCloud(const PointCloud& cloud) {
  if (cloud.points.empty()) throw InvalidArgument("point cloud is empty");
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3d& p = cloud.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw InvalidArgument(fmt::format("point {} is not finite", i));
    }
  }
}

std::vector<Edge> EdgesOfTriangles(const std::vector<Triangle>& tris) {
  std::set<Edge> unique;
  for (const auto& t : tris) {
    for (int a = 0; a < 3; ++a) {
      const int i = t[a], j = t[(a + 1) % 3];
      unique.insert({std::min(i, j), std::max(i, j)});
    }
  }
  return {unique.begin(), unique.end()};
}

std::vector<Edge> EdgesOfTetrahedra(const std::vector<Tetrahedron>& tets) {
  std::set<Edge> unique;
  for (const auto& t : tets) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        unique.insert({std::min(t[a], t[b]), std::max(t[a], t[b])});
      }
    }
  }
  return {unique.begin(), unique.end()};
}

DeformableMesh BuildGridShell(int rows, int cols, double spacing) {
  if (rows < 2 || cols < 2) {
    throw InvalidArgument(
        fmt::format("grid needs rows >= 2 and cols >= 2, got {}x{}", rows, cols));
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw InvalidArgument("grid spacing must be positive");
  }
  DeformableMesh mesh;
  mesh.kind = MeshKind::kThinShell;
  const int n = rows * cols;
  mesh.positions.reserve(n);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      mesh.positions.push_back({c * spacing, r * spacing, 0.0});
    }
  }
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      const int v00 = r * cols + c;
      const int v01 = v00 + 1;
      const int v10 = v00 + cols;
      const int v11 = v10 + 1;
      mesh.triangles.push_back({v00, v01, v11});
      mesh.triangles.push_back({v00, v11, v10});
    }
  }
  mesh.edges = EdgesOfTriangles(mesh.triangles);
  mesh.rest_positions = mesh.positions;
  mesh.velocities.assign(n, Vec3d{});
  mesh.masses.assign(n, kDefaultParticleMass);
  mesh.surface_indices.resize(n);
  for (int i = 0; i < n; ++i) mesh.surface_indices[i] = i;
  return mesh;
}

std::vector<Triangle> BoundaryFaces(const std::vector<Tetrahedron>& tets,
                                    const std::vector<Vec3d>& positions) {
  // Outward faces of a positively oriented tetrahedron (a, b, c, d).
  static constexpr int kFaces[4][3] = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2},
                                       {1, 2, 3}};
  std::map<std::array<int, 3>, std::pair<int, Triangle>> faces;
  for (const auto& t0 : tets) {
    Tetrahedron t = t0;
    if (SignedVolume(positions[t[0]], positions[t[1]], positions[t[2]],
                     positions[t[3]]) < 0.0) {
      std::swap(t[2], t[3]);
    }
    for (const auto& f : kFaces) {
      Triangle tri = {t[f[0]], t[f[1]], t[f[2]]};
      std::array<int, 3> key = tri;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = faces.try_emplace(key, 0, tri);
      ++it->second.first;
    }
  }
  std::vector<Triangle> out;
  for (const auto& [key, entry] : faces) {
    if (entry.first == 1) out.push_back(entry.second);
  }
  return out;
}

std::vector<int> SurfaceParticleSet(const DeformableMesh& mesh) {
  std::vector<int> out;
  if (mesh.kind == MeshKind::kThinShell) {
    out.resize(mesh.size());
    for (int i = 0; i < mesh.size(); ++i) out[i] = i;
    return out;
  }
  std::vector<bool> on(mesh.size(), false);
  for (const auto& f : BoundaryFaces(mesh.tetrahedra, mesh.rest_positions)) {
    for (int i : f) on[i] = true;
  }
  for (int i = 0; i < mesh.size(); ++i) {
    if (on[i]) out.push_back(i);
  }
  return out;
}

DeformableMesh ExtrudeToVolumetric(const DeformableMesh& shell,
                                   double thickness, int layers) {
  if (shell.kind != MeshKind::kThinShell) {
    throw InvalidArgument("extrusion needs a thin-shell input");
  }
  if (!(thickness > 0.0) || !std::isfinite(thickness)) {
    throw InvalidArgument("extrusion thickness must be positive");
  }
  if (layers < 1) throw InvalidArgument("extrusion needs at least one layer");
  const int n = shell.size();
  for (size_t k = 0; k < shell.triangles.size(); ++k) {
    const auto& t = shell.triangles[k];
    const auto& x = shell.rest_positions;
    if (!(TriangleArea(x[t[0]], x[t[1]], x[t[2]]) > 1e-15)) {
      throw InvalidMesh(fmt::format("triangle {} has zero area", k));
    }
  }

  DeformableMesh mesh;
  mesh.kind = MeshKind::kVolumetric;
  const double step = thickness / layers;
  for (int l = 0; l <= layers; ++l) {
    for (int i = 0; i < n; ++i) {
      Vec3d p = shell.rest_positions[i];
      p.z -= l * step;
      mesh.rest_positions.push_back(p);
    }
  }
  // Quad diagonals pass through the smallest global index of each quad, so
  // neighbouring prisms agree on their shared faces.
  for (int l = 0; l < layers; ++l) {
    for (const auto& tri : shell.triangles) {
      std::array<int, 3> s = tri;
      std::sort(s.begin(), s.end());
      const int ti = l * n + s[0], tj = l * n + s[1], tk = l * n + s[2];
      const int bi = ti + n, bj = tj + n, bk = tk + n;
      const Tetrahedron split[3] = {
          {ti, tj, tk, bk}, {ti, tj, bj, bk}, {ti, bi, bj, bk}};
      for (Tetrahedron t : split) {
        const auto& x = mesh.rest_positions;
        if (SignedVolume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]) < 0.0) {
          std::swap(t[2], t[3]);
        }
        mesh.tetrahedra.push_back(t);
      }
    }
  }
  const int total = (layers + 1) * n;
  mesh.positions = mesh.rest_positions;
  mesh.velocities.assign(total, Vec3d{});
  mesh.masses.assign(total, kDefaultParticleMass);
  mesh.edges = EdgesOfTetrahedra(mesh.tetrahedra);
  mesh.triangles = BoundaryFaces(mesh.tetrahedra, mesh.rest_positions);
  mesh.surface_indices = SurfaceParticleSet(mesh);
  for (int l = 0; l <= layers; ++l) {
    for (int i : shell.pinned_indices) mesh.pinned_indices.push_back(l * n + i);
  }
  mesh.grasped_indices = shell.grasped_indices;
  std::sort(mesh.pinned_indices.begin(), mesh.pinned_indices.end());
  return mesh;
}

std::vector<int> IndicesWhere(const DeformableMesh& mesh,
                              const std::function<bool(const Vec3d&)>& pred) {
  std::vector<int> out;
  for (int i = 0; i < mesh.size(); ++i) {
    if (pred(mesh.rest_positions[i])) out.push_back(i);
  }
  return out;
}

double SurfaceArea(const DeformableMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    area += TriangleArea(mesh.positions[t[0]], mesh.positions[t[1]],
                         mesh.positions[t[2]]);
  }
  return area;
}

}  // namespace simtune
