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

#ifndef SIMTUNE_MESH_IO_H_
#define SIMTUNE_MESH_IO_H_

#include <filesystem>
#include <string>

#include "simtune/geometry.h"

namespace simtune {

// Mesh JSON document:
//   { "kind": "thin_shell" | "volumetric",
//     "positions": [[x, y, z], ...], "edges": [[i, j], ...],
//     "triangles": [[i, j, k], ...], "tetrahedra": [[i, j, k, l], ...],
//     "surface": [i, ...], "pinned": [i, ...], "grasped": [i, ...],
//     "masses": [m, ...] }
// Optional "rest_positions" and "velocities" keep a simulated state exact
// across a save/load; they default to positions and zero.
std::string MeshToJson(const DeformableMesh& mesh);
DeformableMesh MeshFromJson(const std::string& text);

void SaveMesh(const DeformableMesh& mesh, const std::filesystem::path& path);
DeformableMesh LoadMesh(const std::filesystem::path& path);

// Triangle shell from `v` and `f` records. Polygons are fan-triangulated.
DeformableMesh LoadObjShell(const std::filesystem::path& path);

}  // namespace simtune

#endif  // SIMTUNE_MESH_IO_H_
