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

#include <filesystem>
#include <fstream>

#include "simtune/errors.h"
#include "simtune/geometry.h"
#include "simtune/mesh_io.h"

namespace simtune {
namespace {

namespace fs = std::filesystem;

fs::path TempPath(const std::string& name) {
  return fs::temp_directory_path() / ("simtune_mesh_io_" + name);
}

void ExpectSameMesh(const DeformableMesh& a, const DeformableMesh& b) {
  EXPECT_EQ(a.kind, b.kind);
  ASSERT_EQ(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.positions[i], b.positions[i]);
    EXPECT_EQ(a.rest_positions[i], b.rest_positions[i]);
    EXPECT_EQ(a.velocities[i], b.velocities[i]);
  }
  EXPECT_EQ(a.masses, b.masses);
  EXPECT_EQ(a.edges, b.edges);
  EXPECT_EQ(a.triangles, b.triangles);
  EXPECT_EQ(a.tetrahedra, b.tetrahedra);
  EXPECT_EQ(a.surface_indices, b.surface_indices);
  EXPECT_EQ(a.pinned_indices, b.pinned_indices);
  EXPECT_EQ(a.grasped_indices, b.grasped_indices);
}

TEST(MeshIo, RoundTripShell) {
  DeformableMesh m = BuildGridShell(4, 3, 0.013);
  m.pinned_indices = {0, 3};
  m.grasped_indices = {11};
  m.positions[5].z = 1.0 / 3.0;
  m.velocities[2] = {0.1, -0.2, 1e-17};
  const fs::path p = TempPath("shell.json");
  SaveMesh(m, p);
  ExpectSameMesh(m, LoadMesh(p));
  fs::remove(p);
}

TEST(MeshIo, RoundTripVolumetric) {
  DeformableMesh s = BuildGridShell(3, 3, 0.01);
  s.pinned_indices = {0};
  const DeformableMesh m = ExtrudeToVolumetric(s, 0.01, 2);
  ExpectSameMesh(m, MeshFromJson(MeshToJson(m)));
}

TEST(MeshIo, TruncatedFileIsFormatError) {
  const std::string text = MeshToJson(BuildGridShell(3, 3, 0.01));
  const fs::path p = TempPath("truncated.json");
  std::ofstream(p) << text.substr(0, text.size() / 2);
  EXPECT_THROW(LoadMesh(p), FormatError);
  fs::remove(p);
}

TEST(MeshIo, MissingFileIsFormatError) {
  EXPECT_THROW(LoadMesh(TempPath("does_not_exist.json")), FormatError);
}

TEST(MeshIo, OutOfRangeIndexFailsValidation) {
  const std::string text = R"({"kind": "thin_shell",
    "positions": [[0,0,0],[1,0,0],[0,1,0]],
    "edges": [[0,1],[1,2],[2,0]], "triangles": [[0,1,7]]})";
  EXPECT_THROW(MeshFromJson(text), InvalidMesh);
}

TEST(MeshIo, WrongShapesAreFormatErrors) {
  EXPECT_THROW(MeshFromJson(R"({"kind": "blob", "positions": []})"), FormatError);
  EXPECT_THROW(MeshFromJson(R"({"kind": "thin_shell", "positions": [[0,0]]})"),
               FormatError);
  EXPECT_THROW(MeshFromJson(R"([1, 2, 3])"), FormatError);
}

TEST(MeshIo, DefaultsForOptionalFields) {
  const DeformableMesh m = MeshFromJson(R"({"kind": "thin_shell",
    "positions": [[0,0,0],[1,0,0],[0,1,0]],
    "edges": [[0,1],[1,2],[0,2]], "triangles": [[0,1,2]],
    "surface": [0,1,2]})");
  EXPECT_EQ(m.masses, std::vector<double>(3, kDefaultParticleMass));
  EXPECT_EQ(m.velocities[1], Vec3d());
  EXPECT_EQ(m.rest_positions, m.positions);
}

TEST(MeshIo, ObjShellWithFanTriangulation) {
  const fs::path p = TempPath("quad.obj");
  std::ofstream(p) << "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
                      "vn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
  const DeformableMesh m = LoadObjShell(p);
  EXPECT_EQ(m.size(), 4);
  EXPECT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.edges.size(), 5u);
  EXPECT_NO_THROW(ValidateMesh(m));
  fs::remove(p);
}

TEST(MeshIo, ObjBadFaceIndex) {
  const fs::path p = TempPath("bad.obj");
  std::ofstream(p) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
  EXPECT_THROW(LoadObjShell(p), std::runtime_error);
  fs::remove(p);
}

}  // namespace
}  // namespace simtune
