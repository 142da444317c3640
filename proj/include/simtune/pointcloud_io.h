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

#ifndef SIMTUNE_POINTCLOUD_IO_H_
#define SIMTUNE_POINTCLOUD_IO_H_

#include <string>
#include <vector>

#include "simtune/geometry.h"
#include "simtune/solver.h"

namespace simtune {

// ASCII PLY with x, y, z vertex properties (others ignored), or CSV with
// x,y,z per row and an optional header. Chosen by extension.
PointCloud LoadPointCloud(const std::string& path);
void SavePointCloudPly(const PointCloud& cloud, const std::string& path);

// Rows of frame,particle,x,y,z (optional header); frame t >= 1 is the frame
// the target drives and lands in entry t - 1. Frames without rows hold. The
// result has max(frames, last frame) entries.
std::vector<Control> LoadControlsCsv(const std::string& path, int frames = 0);
void SaveControlsCsv(const std::vector<Control>& controls,
                     const std::string& path);

// A recorded sequence: mesh.json, controls.csv and one cloud per frame
// (frame_0000.ply or .csv, ...) in one directory. Frame 0 is the initial
// observation.
struct RecordedSequence {
  DeformableMesh mesh;
  std::vector<Control> controls;    // controls[t - 1] drives frame t
  std::vector<PointCloud> clouds;   // clouds[t] observes frame t
};

RecordedSequence LoadRecordedSequence(const std::string& dir);
void SaveRecordedSequence(const RecordedSequence& seq, const std::string& dir);

}  // namespace simtune

#endif  // SIMTUNE_POINTCLOUD_IO_H_
