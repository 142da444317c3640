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

#include "simtune/pointcloud_io.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "simtune/errors.h"
#include "simtune/mesh_io.h"

namespace simtune {
namespace fs = std::filesystem;
namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

bool ParseDouble(const std::string& s, double* out) {
  std::istringstream in(s);
  in >> *out;
  if (in.fail()) return false;
  in >> std::ws;
  return in.eof();
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::ifstream OpenOrThrow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("{}: cannot open", path));
  return in;
}

PointCloud LoadCsvCloud(const std::string& path) {
  std::ifstream in = OpenOrThrow(path);
  PointCloud cloud;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = SplitCsv(line);
    double v[3];
    bool ok = cells.size() >= 3;
    for (int a = 0; ok && a < 3; ++a) ok = ParseDouble(Trim(cells[a]), &v[a]);
    if (!ok) {
      if (line_no == 1 && cloud.points.empty()) continue;  // header
      throw FormatError(fmt::format("{}:{}: expected x,y,z", path, line_no));
    }
    cloud.points.push_back({v[0], v[1], v[2]});
  }
  return cloud;
}

PointCloud LoadPlyCloud(const std::string& path) {
  std::ifstream in = OpenOrThrow(path);
  std::string line;
  int line_no = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) {
      throw FormatError(fmt::format("{}:{}: unexpected end of file", path, line_no));
    }
    ++line_no;
    line = Trim(line);
  };
  next();
  if (line != "ply") throw FormatError(fmt::format("{}:1: missing 'ply' magic", path));
  long vertices = -1;
  std::vector<std::string> props;
  bool in_vertex = false;
  for (;;) {
    next();
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt_name;
      ss >> fmt_name;
      if (fmt_name != "ascii") {
        throw FormatError(fmt::format("{}:{}: only ascii PLY is supported", path, line_no));
      }
    } else if (word == "element") {
      std::string name;
      long count = 0;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) vertices = count;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  const auto col = [&](const char* name) {
    const auto it = std::find(props.begin(), props.end(), name);
    if (it == props.end()) {
      throw FormatError(fmt::format("{}: vertex property '{}' missing", path, name));
    }
    return static_cast<size_t>(it - props.begin());
  };
  if (vertices < 0) throw FormatError(fmt::format("{}: no vertex element", path));
  const size_t cx = col("x"), cy = col("y"), cz = col("z");
  PointCloud cloud;
  cloud.points.reserve(vertices);
  for (long k = 0; k < vertices; ++k) {
    next();
    std::istringstream ss(line);
    std::vector<double> vals(props.size());
    for (auto& v : vals) {
      if (!(ss >> v)) {
        throw FormatError(fmt::format("{}:{}: malformed vertex row", path, line_no));
      }
    }
    cloud.points.push_back({vals[cx], vals[cy], vals[cz]});
  }
  return cloud;
}

}  // namespace

PointCloud LoadPointCloud(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  PointCloud cloud = ext == ".ply" ? LoadPlyCloud(path) : LoadCsvCloud(path);
  try {
    ValidatePointCloud(cloud);
  } catch (const InvalidArgument& e) {
    throw FormatError(fmt::format("{}: {}", path, e.what()));
  }
  return cloud;
}

void SavePointCloudPly(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(fmt::format("{}: cannot write", path));
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
         "end_header\n";
  for (const auto& p : cloud.points) {
    out << fmt::format("{:.17g} {:.17g} {:.17g}\n", p.x, p.y, p.z);
  }
}

std::vector<Control> LoadControlsCsv(const std::string& path, int frames) {
  std::ifstream in = OpenOrThrow(path);
  std::vector<Control> out(std::max(frames, 0));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = SplitCsv(line);
    double v[5];
    bool ok = cells.size() == 5;
    for (int a = 0; ok && a < 5; ++a) ok = ParseDouble(Trim(cells[a]), &v[a]);
    if (!ok) {
      if (line_no == 1) continue;
      throw FormatError(fmt::format("{}:{}: expected frame,particle,x,y,z", path, line_no));
    }
    if (v[0] < 1 || v[1] < 0 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) {
      throw FormatError(fmt::format(
          "{}:{}: frame must be an integer >= 1 and particle an integer >= 0",
          path, line_no));
    }
    const auto f = static_cast<size_t>(v[0]) - 1;
    if (f >= out.size()) out.resize(f + 1);
    out[f].targets[static_cast<int>(v[1])] = {v[2], v[3], v[4]};
  }
  return out;
}

void SaveControlsCsv(const std::vector<Control>& controls,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(fmt::format("{}: cannot write", path));
  out << "frame,particle,x,y,z\n";
  for (size_t f = 0; f < controls.size(); ++f) {
    for (const auto& [i, p] : controls[f].targets) {
      out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", f + 1, i, p.x, p.y, p.z);
    }
  }
}

RecordedSequence LoadRecordedSequence(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw FormatError(fmt::format("{}: not a directory", dir));
  RecordedSequence seq;
  seq.mesh = LoadMesh(root / "mesh.json");
  std::vector<fs::path> clouds;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    const std::string ext = entry.path().extension().string();
    if (name.rfind("frame_", 0) == 0 && (ext == ".ply" || ext == ".csv")) {
      clouds.push_back(entry.path());
    }
  }
  std::sort(clouds.begin(), clouds.end());
  if (clouds.size() < 2) {
    throw FormatError(fmt::format("{}: need at least two frame_* clouds", dir));
  }
  for (const auto& p : clouds) seq.clouds.push_back(LoadPointCloud(p.string()));
  const int frames = static_cast<int>(clouds.size()) - 1;
  if (fs::exists(root / "controls.csv")) {
    seq.controls = LoadControlsCsv((root / "controls.csv").string(), frames);
    seq.controls.resize(frames);
  } else {
    seq.controls.assign(frames, Control{});
  }
  for (size_t t = 0; t < seq.controls.size(); ++t) {
    try {
      ValidateControl(seq.mesh, seq.controls[t]);
    } catch (const InvalidArgument& e) {
      throw FormatError(fmt::format("{}/controls.csv frame {}: {}", dir, t, e.what()));
    }
  }
  return seq;
}

void SaveRecordedSequence(const RecordedSequence& seq, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  SaveMesh(seq.mesh, root / "mesh.json");
  SaveControlsCsv(seq.controls, (root / "controls.csv").string());
  for (size_t t = 0; t < seq.clouds.size(); ++t) {
    SavePointCloudPly(seq.clouds[t],
                      (root / fmt::format("frame_{:04d}.ply", t)).string());
  }
}

}  // namespace simtune
