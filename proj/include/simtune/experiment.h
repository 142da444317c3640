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

#ifndef SIMTUNE_EXPERIMENT_H_
#define SIMTUNE_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "simtune/geometry.h"
#include "simtune/online_optimizer.h"
#include "simtune/pointcloud_io.h"
#include "simtune/residual_mapping.h"
#include "simtune/solver.h"
#include "simtune/stiffness.h"
#include "simtune/twin.h"

namespace simtune {

enum class Method { kPbd, kPbdRm, kPbdRmOn };

Method ParseMethod(const std::string& name);
std::string MethodName(Method m);

struct MeshSpec {
  std::string type = "thin_shell";  // thin_shell | volumetric | file
  int rows = 10;
  int cols = 10;
  double spacing = 0.01;
  double thickness = 0.01;
  int layers = 2;
  std::string path;  // for type "file"
};

// Grid shell (optionally extruded) with the x = 0 column pinned and the two
// middle particles of the far edge grasped; or a mesh file as stored.
DeformableMesh BuildMesh(const MeshSpec& spec);

struct TwinSpec {
  std::string pattern = "uniform";  // uniform | two_region
  double k_dist = 0.5;
  double k_shape = 0.002;
  double soft_k_dist = 0.5;
  double stiff_k_dist = 8.0;
  double noise_sigma = 5e-4;
  int points = 2000;
  std::string trajectory = "poke";
  double amplitude = 0.05;
  // Frames over which the trajectory profile runs; later frames hold its
  // end point. 0 uses every frame.
  int ramp_frames = 0;
  bool model_mismatch = false;
  // Every frame observes the same settled twin pose with the same cloud.
  bool frozen_observation = false;
  int settle_frames = 0;
  std::string keypoints = "exact";  // exact | offset
  int keypoint_count = 15;
};

struct ExperimentConfig {
  MeshSpec mesh;
  TwinSpec twin;
  // Directory of a recorded sequence; replaces mesh and twin when set.
  std::string replay_dir;
  Method method = Method::kPbdRmOn;
  StiffnessPreset preset = StiffnessPreset::kK1;
  PresetValues custom;
  int frames = 60;
  SolverConfig solver;
  ResidualConfig residual;
  OnlineConfig online;
  int horizon = 10;
  // Future-gap and keypoint metrics on every n-th frame.
  int metric_stride = 1;
  uint64_t seed = 0;
  std::string output_dir;
};

// Throws InvalidArgument on inconsistent settings.
void ValidateExperimentConfig(const ExperimentConfig& cfg);

struct FrameMetrics {
  int frame = 0;
  double chamfer_gap = 0.0;
  double l_gap = 0.0;
  double l_hist = 0.0;
  double l_smooth = 0.0;
  double l_total = 0.0;
  double e_t = 0.0;
  double f_t = 0.0;
  int horizon = 0;
  // ok | truncated | skipped | unavailable
  std::string future_status;
  StatSummary k_dist;
  StatSummary k_shape;
  int mapping_restarts = 0;
  bool mapping_fallback = false;
  std::string status = "ok";  // or error:<message>
  // Wall-clock seconds per stage.
  double t_sim = 0.0;
  double t_map = 0.0;
  double t_opt = 0.0;
  double t_metric = 0.0;
};

struct ExperimentResult {
  std::vector<FrameMetrics> frames;
  double sampling_floor = 0.0;  // chamfer gap of the true pose at frame 0
  std::vector<Vec3d> final_state;
  StiffnessField final_field;
  std::vector<std::string> warnings;
  bool aborted = false;
  double mean_chamfer_gap = 0.0;
  double mean_e_t = 0.0;
  double mean_f_t = 0.0;
};

ExperimentResult RunExperiment(const ExperimentConfig& cfg);

// The mesh, controls and observations RunExperiment would see, in the form
// a replay directory stores them.
RecordedSequence SimulateTwinSequence(const ExperimentConfig& cfg);

// Fixed column order, 9 significant digits, no timing columns.
void WriteMetricsCsv(const ExperimentResult& r, std::ostream& out);
void WriteTimingsCsv(const ExperimentResult& r, std::ostream& out);
// metrics.csv, timings.csv, stiffness_final.json, state_final.json and
// summary.json under `dir`.
void WriteExperimentOutputs(const ExperimentConfig& cfg,
                            const ExperimentResult& r, const std::string& dir);

struct SweepCell {
  StiffnessPreset preset;
  Method method;
  ExperimentResult result;
  double seconds = 0.0;
};

// k1, k2, k3 x PBD, PBD-RM, PBD-RM-ON on worker threads; cells come back in
// that fixed order.
std::vector<SweepCell> RunSweep(const ExperimentConfig& base, int threads);
void WriteSweepCsv(const std::vector<SweepCell>& cells, std::ostream& out);

}  // namespace simtune

#endif  // SIMTUNE_EXPERIMENT_H_
