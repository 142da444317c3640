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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "simtune/errors.h"
#include "simtune/geometry.h"
#include "test_util.h"

namespace simtune {
namespace {

TEST(GridShell, SmallestQuadSplitsIntoTwoTriangles) {
  const DeformableMesh m = BuildGridShell(2, 2, 1.0);
  EXPECT_EQ(m.size(), 4);
  EXPECT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.edges.size(), 5u);
  EXPECT_TRUE(m.tetrahedra.empty());
  EXPECT_EQ(m.kind, MeshKind::kThinShell);
}

TEST(GridShell, TriangleCount) {
  const DeformableMesh m = BuildGridShell(3, 3, 0.5);
  EXPECT_EQ(m.size(), 9);
  EXPECT_EQ(m.triangles.size(), 8u);
}

TEST(GridShell, EdgeLengthsAreSideOrDiagonal) {
  const DeformableMesh m = BuildGridShell(10, 10, 0.01);
  ASSERT_EQ(m.size(), 100);
  for (const auto& e : m.edges) {
    const double len = Norm(m.positions[e[0]] - m.positions[e[1]]);
    const bool side = std::abs(len - 0.01) < 1e-12;
    const bool diag = std::abs(len - 0.01 * std::sqrt(2.0)) < 1e-12;
    EXPECT_TRUE(side || diag) << len;
  }
}

TEST(GridShell, SurfaceIsEveryParticle) {
  const DeformableMesh m = BuildGridShell(4, 5, 0.1);
  const auto s = SurfaceParticleSet(m);
  ASSERT_EQ(s.size(), 20u);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(s[i], i);
  EXPECT_EQ(m.surface_indices, s);
}

TEST(GridShell, RejectsDegenerateInput) {
  EXPECT_THROW(BuildGridShell(1, 4, 0.1), InvalidArgument);
  EXPECT_THROW(BuildGridShell(3, 3, 0.0), InvalidArgument);
}

TEST(Extrude, SingleQuadGivesTwoPrisms) {
  const DeformableMesh m = ExtrudeToVolumetric(BuildGridShell(2, 2, 1.0), 0.1, 1);
  EXPECT_EQ(m.size(), 8);
  EXPECT_EQ(m.tetrahedra.size(), 6u);
  EXPECT_EQ(m.kind, MeshKind::kVolumetric);
}

TEST(Extrude, VolumeEqualsAreaTimesThickness) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(2, 6), lay(1, 3);
  std::uniform_real_distribution<double> len(0.005, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = dim(rng), cols = dim(rng), layers = lay(rng);
    const double spacing = len(rng), thickness = len(rng);
    const DeformableMesh m =
        ExtrudeToVolumetric(BuildGridShell(rows, cols, spacing), thickness, layers);
    double vol = 0.0;
    for (const auto& t : m.tetrahedra) {
      const double v = SignedVolume(m.positions[t[0]], m.positions[t[1]],
                                    m.positions[t[2]], m.positions[t[3]]);
      EXPECT_GT(v, 0.0);
      vol += v;
    }
    const double expect = (rows - 1) * spacing * (cols - 1) * spacing * thickness;
    EXPECT_NEAR(vol / expect, 1.0, 1e-9);
  }
}

TEST(Extrude, ThreeByThreeTwoLayersHasOneInteriorParticle) {
  const DeformableMesh m = ExtrudeToVolumetric(BuildGridShell(3, 3, 1.0), 1.0, 2);
  EXPECT_EQ(m.size(), 27);
  EXPECT_EQ(SurfaceParticleSet(m).size(), 26u);
}

TEST(Extrude, CarriesPinsThroughLevelsAndGraspsOnTop) {
  DeformableMesh s = BuildGridShell(3, 3, 1.0);
  s.pinned_indices = {0, 3};
  s.grasped_indices = {8};
  const DeformableMesh m = ExtrudeToVolumetric(s, 1.0, 2);
  EXPECT_EQ(m.pinned_indices, (std::vector<int>{0, 3, 9, 12, 18, 21}));
  EXPECT_EQ(m.grasped_indices, std::vector<int>{8});
  EXPECT_NO_THROW(ValidateMesh(m));
}

TEST(Surface, SingleTetrahedron) {
  DeformableMesh m = testing::PointMesh(
      {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {});
  m.kind = MeshKind::kVolumetric;
  m.tetrahedra = {{0, 1, 2, 3}};
  EXPECT_EQ(SurfaceParticleSet(m), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(BoundaryFaces(m.tetrahedra, m.positions).size(), 4u);
}

// Brute force: a face is on the boundary when exactly one tetrahedron uses it.
TEST(Surface, MatchesFaceIncidenceCount) {
  const DeformableMesh m = ExtrudeToVolumetric(BuildGridShell(5, 5, 1.0), 1.0, 3);
  std::map<std::array<int, 3>, int> count;
  for (const auto& t : m.tetrahedra) {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> f;
      int k = 0;
      for (int v = 0; v < 4; ++v) {
        if (v != skip) f[k++] = t[v];
      }
      std::sort(f.begin(), f.end());
      ++count[f];
    }
  }
  std::set<int> surface;
  for (const auto& [f, c] : count) {
    if (c == 1) surface.insert(f.begin(), f.end());
  }
  const auto got = SurfaceParticleSet(m);
  EXPECT_EQ(std::vector<int>(surface.begin(), surface.end()), got);
  // 5x5x4 block: everything but the 3x3x2 interior.
  EXPECT_EQ(got.size(), 100u - 18u);
}

TEST(Surface, BoundaryFacesPointOutward) {
  const DeformableMesh m = ExtrudeToVolumetric(BuildGridShell(4, 4, 1.0), 1.0, 2);
  Vec3d center;
  for (const auto& p : m.positions) center += p;
  center = center / static_cast<double>(m.size());
  for (const auto& f : m.triangles) {
    const Vec3d a = m.positions[f[0]], b = m.positions[f[1]], c = m.positions[f[2]];
    const Vec3d n = Cross(b - a, c - a);
    EXPECT_GT(Dot(n, (a + b + c) / 3.0 - center), 0.0);
  }
}

TEST(ValidateMesh, AcceptsGeneratedMeshes) {
  EXPECT_NO_THROW(ValidateMesh(BuildGridShell(10, 10, 0.01)));
  EXPECT_NO_THROW(ValidateMesh(ExtrudeToVolumetric(BuildGridShell(8, 8, 0.01), 0.01, 2)));
}

TEST(ValidateMesh, RejectsBrokenInvariants) {
  const DeformableMesh good = BuildGridShell(3, 3, 1.0);
  {
    DeformableMesh m = good;
    m.triangles[0][1] = 9;
    EXPECT_THROW(ValidateMesh(m), InvalidMesh);
  }
  {
    DeformableMesh m = good;
    m.pinned_indices = {2};
    m.grasped_indices = {2};
    EXPECT_THROW(ValidateMesh(m), InvalidMesh);
  }
  {
    DeformableMesh m = good;
    m.masses[4] = 0.0;
    EXPECT_THROW(ValidateMesh(m), InvalidMesh);
  }
  {
    DeformableMesh m = ExtrudeToVolumetric(good, 1.0, 1);
    std::swap(m.tetrahedra[0][0], m.tetrahedra[0][1]);
    EXPECT_THROW(ValidateMesh(m), InvalidMesh);
  }
  {
    DeformableMesh m = good;
    m.surface_indices.pop_back();
    EXPECT_THROW(ValidateMesh(m), InvalidMesh);
  }
}

TEST(IndicesWhere, SelectsByRestPosition) {
  const DeformableMesh m = BuildGridShell(3, 4, 1.0);
  EXPECT_EQ(IndicesWhere(m, [](const Vec3d& p) { return p.x < 0.5; }),
            (std::vector<int>{0, 4, 8}));
}

}  // namespace
}  // namespace simtune
