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

#include "simtune/mesh_io.h"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "simtune/errors.h"

namespace simtune {
namespace {

using nlohmann::json;

json Vec3List(const std::vector<Vec3d>& v) {
  json out = json::array();
  for (const auto& p : v) out.push_back({p.x, p.y, p.z});
  return out;
}

template <size_t N>
json IndexList(const std::vector<std::array<int, N>>& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back(e);
  return out;
}

const json& Field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw FormatError(fmt::format("mesh JSON: missing field '{}'", key));
  }
  return *it;
}

std::vector<Vec3d> ReadVec3List(const json& arr, const char* key) {
  if (!arr.is_array()) {
    throw FormatError(fmt::format("mesh JSON: '{}' must be an array", key));
  }
  std::vector<Vec3d> out;
  out.reserve(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    const json& p = arr[i];
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() ||
        !p[1].is_number() || !p[2].is_number()) {
      throw FormatError(
          fmt::format("mesh JSON: {}[{}] must be [x, y, z]", key, i));
    }
    out.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
  }
  return out;
}

template <size_t N>
std::vector<std::array<int, N>> ReadIndexList(const json& doc,
                                              const char* key) {
  std::vector<std::array<int, N>> out;
  auto it = doc.find(key);
  if (it == doc.end()) return out;
  if (!it->is_array()) {
    throw FormatError(fmt::format("mesh JSON: '{}' must be an array", key));
  }
  for (size_t i = 0; i < it->size(); ++i) {
    const json& e = (*it)[i];
    if (!e.is_array() || e.size() != N) {
      throw FormatError(fmt::format("mesh JSON: {}[{}] must hold {} indices",
                                    key, i, N));
    }
    std::array<int, N> idx{};
    for (size_t k = 0; k < N; ++k) {
      if (!e[k].is_number_integer()) {
        throw FormatError(
            fmt::format("mesh JSON: {}[{}][{}] is not an integer", key, i, k));
      }
      idx[k] = e[k].get<int>();
    }
    out.push_back(idx);
  }
  return out;
}

std::vector<int> ReadIndexSet(const json& doc, const char* key) {
  std::vector<int> out;
  auto it = doc.find(key);
  if (it == doc.end()) return out;
  if (!it->is_array()) {
    throw FormatError(fmt::format("mesh JSON: '{}' must be an array", key));
  }
  for (size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_number_integer()) {
      throw FormatError(
          fmt::format("mesh JSON: {}[{}] is not an integer", key, i));
    }
    out.push_back((*it)[i].get<int>());
  }
  return out;
}

}  // namespace

std::string MeshToJson(const DeformableMesh& mesh) {
  json doc;
  doc["kind"] =
      mesh.kind == MeshKind::kThinShell ? "thin_shell" : "volumetric";
  doc["positions"] = Vec3List(mesh.positions);
  doc["rest_positions"] = Vec3List(mesh.rest_positions);
  doc["velocities"] = Vec3List(mesh.velocities);
  doc["edges"] = IndexList(mesh.edges);
  doc["triangles"] = IndexList(mesh.triangles);
  doc["tetrahedra"] = IndexList(mesh.tetrahedra);
  doc["surface"] = mesh.surface_indices;
  doc["pinned"] = mesh.pinned_indices;
  doc["grasped"] = mesh.grasped_indices;
  doc["masses"] = mesh.masses;
  return doc.dump(1);
}

DeformableMesh MeshFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("mesh JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw FormatError("mesh JSON: top level must be an object");

  DeformableMesh mesh;
  const json& kind = Field(doc, "kind");
  if (kind == "thin_shell") {
    mesh.kind = MeshKind::kThinShell;
  } else if (kind == "volumetric") {
    mesh.kind = MeshKind::kVolumetric;
  } else {
    throw FormatError(
        fmt::format("mesh JSON: unknown kind {}", kind.dump()));
  }
  mesh.positions = ReadVec3List(Field(doc, "positions"), "positions");
  const int n = mesh.size();
  mesh.rest_positions = doc.contains("rest_positions")
                            ? ReadVec3List(doc["rest_positions"], "rest_positions")
                            : mesh.positions;
  mesh.velocities = doc.contains("velocities")
                        ? ReadVec3List(doc["velocities"], "velocities")
                        : std::vector<Vec3d>(n);
  mesh.edges = ReadIndexList<2>(doc, "edges");
  mesh.triangles = ReadIndexList<3>(doc, "triangles");
  mesh.tetrahedra = ReadIndexList<4>(doc, "tetrahedra");
  mesh.surface_indices = ReadIndexSet(doc, "surface");
  mesh.pinned_indices = ReadIndexSet(doc, "pinned");
  mesh.grasped_indices = ReadIndexSet(doc, "grasped");
  if (doc.contains("masses")) {
    const json& m = doc["masses"];
    if (!m.is_array()) throw FormatError("mesh JSON: 'masses' must be an array");
    for (size_t i = 0; i < m.size(); ++i) {
      if (!m[i].is_number()) {
        throw FormatError(fmt::format("mesh JSON: masses[{}] is not a number", i));
      }
      mesh.masses.push_back(m[i].get<double>());
    }
  } else {
    mesh.masses.assign(n, kDefaultParticleMass);
  }
  const bool tets_in_range = std::all_of(
      mesh.tetrahedra.begin(), mesh.tetrahedra.end(), [n](const auto& t) {
        return std::all_of(t.begin(), t.end(),
                           [n](int i) { return i >= 0 && i < n; });
      });
  if (!doc.contains("surface") && tets_in_range) {
    mesh.surface_indices = SurfaceParticleSet(mesh);
  }
  ValidateMesh(mesh);
  return mesh;
}

void SaveMesh(const DeformableMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << MeshToJson(mesh) << "\n";
}

DeformableMesh LoadMesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return MeshFromJson(ss.str());
}

DeformableMesh LoadObjShell(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  DeformableMesh mesh;
  mesh.kind = MeshKind::kThinShell;
  std::string line;
  int line_no = 0;
  std::vector<std::vector<int>> faces;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3d p;
      if (!(ls >> p.x >> p.y >> p.z)) {
        throw FormatError(fmt::format("{}:{}: bad vertex record",
                                      path.string(), line_no));
      }
      mesh.positions.push_back(p);
    } else if (tag == "f") {
      std::vector<int> face;
      std::string tok;
      while (ls >> tok) {
        try {
          const int idx = std::stoi(tok.substr(0, tok.find('/')));
          face.push_back(idx > 0 ? idx - 1
                                 : static_cast<int>(mesh.positions.size()) + idx);
        } catch (const std::exception&) {
          throw FormatError(fmt::format("{}:{}: bad face index '{}'",
                                        path.string(), line_no, tok));
        }
      }
      if (face.size() < 3) {
        throw FormatError(fmt::format("{}:{}: face needs 3 vertices",
                                      path.string(), line_no));
      }
      faces.push_back(std::move(face));
    }
  }
  for (const auto& f : faces) {
    for (size_t k = 1; k + 1 < f.size(); ++k) {
      mesh.triangles.push_back({f[0], f[k], f[k + 1]});
    }
  }
  const int n = mesh.size();
  for (const auto& t : mesh.triangles) {
    for (int i : t) {
      if (i < 0 || i >= n) {
        throw InvalidMesh(fmt::format("OBJ face references vertex {} of {}",
                                      i + 1, n));
      }
    }
  }
  mesh.edges = EdgesOfTriangles(mesh.triangles);
  mesh.rest_positions = mesh.positions;
  mesh.velocities.assign(n, Vec3d{});
  mesh.masses.assign(n, kDefaultParticleMass);
  mesh.surface_indices = SurfaceParticleSet(mesh);
  ValidateMesh(mesh);
  return mesh;
}

}  // namespace simtune
