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

// Command-line harness: run, gradcheck, sweep, replay and mesh.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "simtune/config.h"
#include "simtune/errors.h"
#include "simtune/experiment.h"
#include "simtune/gradcheck.h"
#include "simtune/mesh_io.h"
#include "simtune/pointcloud_io.h"

namespace fs = std::filesystem;
using namespace simtune;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr double kGradTolerance = 1e-3;

// Flags shared by the experiment subcommands.
struct Overrides {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  std::optional<int> frames;
  std::string method;
  std::string preset;
  int threads = 0;
};

void AddOverrides(CLI::App* app, Overrides* o, bool with_method) {
  app->add_option("--config", o->config, "experiment config JSON");
  app->add_option("--out", o->out, "output directory");
  app->add_option("--seed", o->seed, "experiment seed");
  app->add_option("--frames", o->frames, "number of frames");
  if (with_method) app->add_option("--method", o->method, "PBD, PBD-RM or PBD-RM-ON");
}

// Output root: --out, then the config, then $SIMTUNE_OUT/<sub>, then
// results/<sub>.
std::string OutputDir(const Overrides& o, const ExperimentConfig& cfg,
                      const std::string& sub) {
  if (!o.out.empty()) return o.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("SIMTUNE_OUT"); env && *env) {
    return (fs::path(env) / sub).string();
  }
  return (fs::path("results") / sub).string();
}

ExperimentConfig LoadWithOverrides(const Overrides& o, bool preset_is_scenario) {
  ExperimentConfig cfg = ScenarioConfig("thin_shell_default");
  if (!o.preset.empty() && (preset_is_scenario || IsScenario(o.preset))) {
    cfg = ScenarioConfig(o.preset);
  }
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw InvalidArgument(fmt::format("{}: cannot open", o.config));
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument(fmt::format("{}: {}", o.config, e.what()));
    }
    cfg = ParseExperimentConfig(j, cfg);
  }
  if (!o.preset.empty() && !preset_is_scenario && !IsScenario(o.preset)) {
    cfg.preset = ParseStiffnessPreset(o.preset);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.frames) cfg.frames = *o.frames;
  if (!o.method.empty()) cfg.method = ParseMethod(o.method);
  ValidateExperimentConfig(cfg);
  return cfg;
}

void PrintSummary(const ExperimentConfig& cfg, const ExperimentResult& r,
                  const std::string& dir) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << fmt::format(
      "method={} preset={} frames={} mean_chamfer_gap={:.6g} mean_e_t={:.6g} "
      "mean_f_t={:.6g} floor={:.6g}{}\n",
      MethodName(cfg.method), StiffnessPresetName(cfg.preset), r.frames.size(),
      r.mean_chamfer_gap, r.mean_e_t, r.mean_f_t, r.sampling_floor,
      r.aborted ? " ABORTED" : "");
  std::cout << "wrote " << dir << "\n";
}

int RunAndWrite(const ExperimentConfig& cfg, const std::string& dir) {
  const ExperimentResult r = RunExperiment(cfg);
  WriteExperimentOutputs(cfg, r, dir);
  std::ofstream(fs::path(dir) / "config.json") << ExperimentConfigToJson(cfg).dump(2) << "\n";
  PrintSummary(cfg, r, dir);
  if (r.aborted) {
    std::cerr << "error: run aborted after repeated frame failures\n";
    return kExitRuntime;
  }
  return 0;
}

int CmdRun(const Overrides& o, const std::string& record) {
  ExperimentConfig cfg = LoadWithOverrides(o, false);
  if (!record.empty()) {
    SaveRecordedSequence(SimulateTwinSequence(cfg), record);
    std::cout << "recorded " << record << "\n";
    return 0;
  }
  return RunAndWrite(cfg, OutputDir(o, cfg, "run"));
}

int CmdReplay(Overrides o, const std::string& dir) {
  ExperimentConfig cfg = LoadWithOverrides(o, false);
  cfg.replay_dir = dir;
  if (!o.frames) cfg.frames = 0;  // whole recording
  return RunAndWrite(cfg, OutputDir(o, cfg, "replay"));
}

int CmdSweep(Overrides o) {
  if (o.preset.empty()) o.preset = "thin_shell_default";
  const ExperimentConfig cfg = LoadWithOverrides(o, true);
  const int threads = o.threads > 0
                          ? o.threads
                          : std::max(1u, std::thread::hardware_concurrency());
  const auto cells = RunSweep(cfg, threads);
  const std::string dir = OutputDir(o, cfg, "sweep");
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "sweep.csv");
    WriteSweepCsv(cells, f);
  }
  WriteSweepCsv(cells, std::cout);
  bool aborted = false;
  for (const auto& c : cells) {
    std::cerr << fmt::format("{} {} {:.1f}s\n", StiffnessPresetName(c.preset),
                             MethodName(c.method), c.seconds);
    aborted = aborted || c.result.aborted;
  }
  return aborted ? kExitRuntime : 0;
}

int CmdGradcheck(const std::string& size, uint64_t seed) {
  std::vector<GradCheckConfig> cases;
  if (size == "small" || size == "all") cases.push_back({.rows = 2, .cols = 2, .seed = seed});
  if (size == "medium" || size == "all") cases.push_back({.rows = 4, .cols = 4, .seed = seed});
  double worst = 0.0;
  for (const auto& c : cases) {
    const GradCheckReport r = RunGradCheck(c);
    std::cout << fmt::format(
        "{}x{} params={} rel_error={:.3e} max_component_error={:.3e} |g|={:.3e} "
        "time={:.2f}s\n",
        r.rows, r.cols, r.parameters, r.relative_error, r.max_component_error,
        r.gradient_norm, r.seconds);
    worst = std::max(worst, r.max_component_error);
  }
  const bool ok = worst <= kGradTolerance;
  std::cout << fmt::format("max component error {:.3e} (tolerance {:.0e}) {}\n",
                           worst, kGradTolerance, ok ? "PASS" : "FAIL");
  return ok ? 0 : kExitRuntime;
}

int CmdMesh(MeshSpec spec, const std::string& obj, const std::string& out) {
  DeformableMesh mesh;
  if (!obj.empty()) {
    mesh = LoadObjShell(obj);
    if (spec.type == "volumetric") mesh = ExtrudeToVolumetric(mesh, spec.thickness, spec.layers);
  } else {
    mesh = BuildMesh(spec);
  }
  ValidateMesh(mesh);
  SaveMesh(mesh, out);
  std::cout << fmt::format("{} particles, {} triangles, {} tetrahedra -> {}\n",
                           mesh.size(), mesh.triangles.size(),
                           mesh.tetrahedra.size(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable soft-body simulation with online stiffness tuning"};
  app.require_subcommand(1);

  Overrides run_o;
  std::string record;
  auto* run = app.add_subcommand("run", "run an experiment against the synthetic twin");
  AddOverrides(run, &run_o, true);
  run->add_option("--preset", run_o.preset, "stiffness preset (k1, k2, k3, custom) or scenario");
  run->add_option("--record", record, "save the twin sequence as a replay directory and exit");

  Overrides replay_o;
  std::string replay_dir;
  auto* replay = app.add_subcommand("replay", "run an experiment on a recorded sequence");
  replay->add_option("dir", replay_dir, "recording directory")->required();
  AddOverrides(replay, &replay_o, true);
  replay->add_option("--preset", replay_o.preset, "stiffness preset (k1, k2, k3, custom)");

  Overrides sweep_o;
  auto* sweep = app.add_subcommand("sweep", "k1/k2/k3 x PBD/PBD-RM/PBD-RM-ON table");
  AddOverrides(sweep, &sweep_o, false);
  sweep->add_option("--preset", sweep_o.preset, "scenario (default thin_shell_default)");
  sweep->add_option("--threads", sweep_o.threads, "worker threads (default: all cores)");

  std::string grad_size = "all";
  uint64_t grad_seed = 0;
  auto* grad = app.add_subcommand("gradcheck", "reverse-mode vs finite-difference gradient");
  grad->add_option("--size", grad_size, "small (2x2), medium (4x4) or all")
      ->check(CLI::IsMember({"small", "medium", "all"}));
  grad->add_option("--seed", grad_seed, "seed");

  MeshSpec mesh_spec;
  std::string obj, mesh_out;
  auto* mesh = app.add_subcommand("mesh", "build, extrude and save a mesh");
  mesh->add_option("--type", mesh_spec.type, "thin_shell or volumetric")
      ->check(CLI::IsMember({"thin_shell", "volumetric"}));
  mesh->add_option("--rows", mesh_spec.rows);
  mesh->add_option("--cols", mesh_spec.cols);
  mesh->add_option("--spacing", mesh_spec.spacing);
  mesh->add_option("--thickness", mesh_spec.thickness);
  mesh->add_option("--layers", mesh_spec.layers);
  mesh->add_option("--obj", obj, "start from an OBJ surface instead of a grid");
  mesh->add_option("--out", mesh_out, "mesh JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return CmdRun(run_o, record);
    if (*replay) return CmdReplay(replay_o, replay_dir);
    if (*sweep) return CmdSweep(sweep_o);
    if (*grad) return CmdGradcheck(grad_size, grad_seed);
    if (*mesh) return CmdMesh(mesh_spec, obj, mesh_out);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InvalidMesh& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
