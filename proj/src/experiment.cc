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

#include "simtune/experiment.h"

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "simtune/chamfer.h"
#include "simtune/errors.h"
#include "simtune/mesh_io.h"
#include "simtune/metrics.h"
#include "simtune/pointcloud_io.h"

namespace simtune {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxConsecutiveFailures = 5;
// Estimator surface samples per observed point when measuring the gap.
constexpr int kGapOversampling = 4;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Everything the frame loop reads besides the estimator.
struct Scenario {
  DeformableMesh mesh;
  std::vector<Control> controls;       // controls[t - 1] drives frame t
  std::vector<PointCloud> clouds;      // clouds[t] observes frame t
  PointCloud initial_cloud;            // true pose at frame 0
  std::vector<Vec3d> initial_truth;
  std::vector<std::vector<Vec3d>> keypoints;  // per frame; empty in replay
  int points = 2000;
};

Scenario BuildScenario(const ExperimentConfig& cfg) {
  Scenario s;
  if (!cfg.replay_dir.empty()) {
    RecordedSequence seq = LoadRecordedSequence(cfg.replay_dir);
    s.mesh = std::move(seq.mesh);
    const int frames =
        std::min<int>(cfg.frames > 0 ? cfg.frames : seq.controls.size(),
                      seq.controls.size());
    s.controls.assign(seq.controls.begin(), seq.controls.begin() + frames);
    s.clouds.assign(seq.clouds.begin(), seq.clouds.begin() + frames + 1);
    s.initial_cloud = s.clouds.front();
    s.initial_truth = s.mesh.positions;
    s.points = s.initial_cloud.size();
    return s;
  }
  const TwinSpec& ts = cfg.twin;
  s.mesh = BuildMesh(cfg.mesh);
  s.points = ts.points;
  const int n = s.mesh.size();
  const int ramp = ts.ramp_frames > 0 ? std::min(ts.ramp_frames, cfg.frames) : cfg.frames;
  s.controls = ScriptedTrajectory(s.mesh, ParseTrajectoryKind(ts.trajectory),
                                  ramp, ts.amplitude);
  s.controls.resize(cfg.frames, s.controls.back());

  TwinConfig tc;
  if (ts.pattern == "two_region") {
    tc.k_dist = TwoRegionPattern(s.mesh, ts.soft_k_dist, ts.stiff_k_dist);
  } else {
    tc.k_dist.assign(n, ts.k_dist);
  }
  tc.k_shape.assign(n, ts.k_shape);
  tc.noise_sigma = ts.noise_sigma;
  tc.points_per_frame = ts.points;
  tc.seed = cfg.seed;
  tc.model_mismatch = ts.model_mismatch;
  tc.trajectory = s.controls;
  // The frozen pose is the twin settled for settle_frames after the ramp,
  // independent of the run length.
  if (ts.frozen_observation) {
    tc.trajectory.resize(ramp + ts.settle_frames, s.controls.back());
  }
  const Twin twin(s.mesh, tc, cfg.solver);
  const int last = twin.frames();
  s.initial_truth = twin.state(0);
  s.initial_cloud = twin.Observe(0);
  s.clouds.push_back(s.initial_cloud);
  const PointCloud frozen = ts.frozen_observation ? twin.Observe(last) : PointCloud{};
  for (int t = 1; t <= cfg.frames; ++t) {
    s.clouds.push_back(ts.frozen_observation ? frozen : twin.Observe(t));
  }
  std::vector<Keypoint> kp =
      SelectKeypoints(twin.state(0), twin.state(last), ts.keypoint_count);
  if (ts.keypoints == "offset") kp = OffsetKeypoints(s.mesh, kp);
  for (int t = 0; t <= cfg.frames; ++t) {
    const int src = ts.frozen_observation && t > 0 ? last : t;
    s.keypoints.push_back(KeypointPositions(kp, twin.state(src)));
  }
  return s;
}

uint64_t MixSeed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mean Chamfer between a dense area-uniform sampling of the estimator's
// surface and the observation. Sampling the surface rather than comparing
// particles keeps the particle spacing out of the floor.
double SurfaceGap(const DeformableMesh& mesh, const std::vector<Vec3d>& x,
                  const PointCloud& z, int points, uint64_t seed, int frame) {
  const PointCloud dense =
      ObserveSurface(mesh, x, kGapOversampling * points, 0.0, seed, frame);
  return MeanChamfer(dense.points, z.points);
}

double FiniteMean(const std::vector<double>& v) {
  double s = 0.0;
  int n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  }
  return n > 0 ? s / n : kNaN;
}

}  // namespace

Method ParseMethod(const std::string& name) {
  if (name == "PBD") return Method::kPbd;
  if (name == "PBD-RM") return Method::kPbdRm;
  if (name == "PBD-RM-ON") return Method::kPbdRmOn;
  throw InvalidArgument(
      fmt::format("unknown method '{}' (PBD, PBD-RM, PBD-RM-ON)", name));
}

std::string MethodName(Method m) {
  switch (m) {
    case Method::kPbd: return "PBD";
    case Method::kPbdRm: return "PBD-RM";
    case Method::kPbdRmOn: return "PBD-RM-ON";
  }
  return "PBD";
}

DeformableMesh BuildMesh(const MeshSpec& spec) {
  if (spec.type == "file") {
    if (spec.path.empty()) throw InvalidArgument("mesh.path is required for type 'file'");
    return LoadMesh(spec.path);
  }
  if (spec.type != "thin_shell" && spec.type != "volumetric") {
    throw InvalidArgument(fmt::format("unknown mesh type '{}'", spec.type));
  }
  DeformableMesh shell = BuildGridShell(spec.rows, spec.cols, spec.spacing);
  const double eps = 1e-6 * spec.spacing;
  shell.pinned_indices = IndicesWhere(shell, [&](const Vec3d& p) { return p.x < eps; });
  const int r0 = (spec.rows - 1) / 2;
  shell.grasped_indices = {r0 * spec.cols + spec.cols - 1,
                           (r0 + 1) * spec.cols + spec.cols - 1};
  if (spec.type == "thin_shell") return shell;
  return ExtrudeToVolumetric(shell, spec.thickness, spec.layers);
}

void ValidateExperimentConfig(const ExperimentConfig& cfg) {
  if (cfg.frames < 1) throw InvalidArgument("frames must be >= 1");
  if (cfg.horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (cfg.metric_stride < 1) throw InvalidArgument("metric_stride must be >= 1");
  ValidateSolverConfig(cfg.solver);
  ValidateResidualConfig(cfg.residual);
  const auto& t = cfg.twin;
  if (t.points < 1) throw InvalidArgument("twin.points must be >= 1");
  if (!(t.noise_sigma >= 0.0)) throw InvalidArgument("twin.noise_sigma must be >= 0");
  if (t.pattern != "uniform" && t.pattern != "two_region") {
    throw InvalidArgument(fmt::format("unknown twin.pattern '{}'", t.pattern));
  }
  if (t.keypoints != "exact" && t.keypoints != "offset") {
    throw InvalidArgument(fmt::format("unknown twin.keypoints '{}'", t.keypoints));
  }
  ParseTrajectoryKind(t.trajectory);
  if (t.ramp_frames < 0 || t.settle_frames < 0 || t.keypoint_count < 0) {
    throw InvalidArgument("twin frame and keypoint counts must be non-negative");
  }
  const auto& o = cfg.online;
  if (!(o.adam.learning_rate > 0.0)) throw InvalidArgument("optimizer.learning_rate must be positive");
  if (o.snapshot_capacity < 1 || o.snapshot_samples < 1) {
    throw InvalidArgument("snapshot capacity and samples must be >= 1");
  }
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  ValidateExperimentConfig(cfg);
  const Scenario sc = BuildScenario(cfg);
  const int frames = static_cast<int>(sc.controls.size());
  ExperimentResult res;

  DeformableMesh mesh = sc.mesh;
  const ConstraintSet cs = BuildConstraints(mesh);
  StiffnessField field = InitStiffness(cfg.preset, mesh.size(), cfg.custom,
                                       StiffnessBounds{}, &res.warnings);
  OnlineOptimizer opt(mesh, cs, field, cfg.online, MixSeed(cfg.seed, 1));
  const uint64_t gap_seed = MixSeed(cfg.seed, 2);
  const auto weights_of = [&](const StiffnessField& f) {
    const std::vector<double> kd = f.KDist(), ks = f.KShape();
    return StiffnessToConstraintWeights<double>(cs, kd, ks, f.k_vol);
  };
  ConstraintWeights<double> weights = weights_of(field);

  res.sampling_floor =
      SurfaceGap(mesh, sc.initial_truth, sc.initial_cloud, sc.points, gap_seed, 0);
  const std::vector<Vec3d> x0 = mesh.positions;
  std::vector<int> nn;
  if (!sc.keypoints.empty()) nn = NearestParticleIndices(x0, sc.keypoints[0]);

  std::vector<Vec3d> x = x0;
  int failures = 0;
  for (int t = 1; t <= frames; ++t) {
    FrameMetrics fm;
    fm.frame = t;
    fm.l_gap = fm.l_hist = fm.l_smooth = fm.l_total = kNaN;
    fm.e_t = fm.f_t = kNaN;
    try {
      const Control& u = sc.controls[t - 1];
      const PointCloud& z = sc.clouds[t];
      std::vector<Vec3d> x_sim;
      std::vector<Vec3d> next;
      auto t0 = Clock::now();
      if (cfg.method == Method::kPbdRmOn) {
        OnlineStepResult r = opt.Step(x, u, z, t, cfg.solver, cfg.residual);
        fm.t_opt = Seconds(t0, Clock::now());
        fm.l_gap = r.record.losses.gap;
        fm.l_hist = r.record.losses.hist;
        fm.l_smooth = r.record.losses.smooth;
        fm.l_total = r.record.losses.total;
        fm.mapping_restarts = r.record.mapping.restarts;
        fm.mapping_fallback = r.record.mapping.fallback;
        x_sim = std::move(r.x);
        next = std::move(r.corrected);
        field = opt.field();
        weights = weights_of(field);
      } else {
        x_sim = PbdStep(mesh, x, u, cs, weights, cfg.solver);
        auto t1 = Clock::now();
        fm.t_sim = Seconds(t0, t1);
        next = x_sim;
        if (cfg.method == Method::kPbdRm) {
          const MappingResult m = ResidualMap(mesh, x_sim, z, cs, cfg.residual);
          for (size_t i = 0; i < next.size(); ++i) next[i] += m.field.delta[i];
          fm.l_gap = FrobeniusNorm(m.field.delta);
          fm.mapping_restarts = m.report.restarts;
          fm.mapping_fallback = m.report.fallback;
          fm.t_map = Seconds(t1, Clock::now());
        }
      }
      if (!cfg.solver.quasi_static) {
        for (int i = 0; i < mesh.size(); ++i) {
          mesh.velocities[i] = (x_sim[i] - x[i]) / cfg.solver.dt;
        }
      }
      x = std::move(next);
      fm.chamfer_gap = SurfaceGap(mesh, x, z, sc.points, gap_seed, t);

      auto tm = Clock::now();
      if (t % cfg.metric_stride == 0) {
        const int avail = std::min(cfg.horizon, frames - t);
        std::vector<const PointCloud*> future;
        for (int s = 1; s <= avail; ++s) future.push_back(&sc.clouds[t + s]);
        const std::span<const Control> fc(sc.controls.data() + t, avail);
        const FutureGap fg = AverageFutureGap(mesh, cs, weights, x, fc, future,
                                              cfg.horizon, cfg.solver, cfg.residual);
        fm.horizon = fg.horizon;
        if (fg.horizon == 0) {
          fm.future_status = "unavailable";
        } else {
          fm.future_status = fg.truncated ? "truncated" : "ok";
          fm.e_t = fg.value;
          if (!nn.empty()) {
            fm.f_t = FutureKeypointError(x0, fg.final_state, sc.keypoints[0],
                                         sc.keypoints[t + fg.horizon], nn);
          }
        }
      } else {
        fm.future_status = "skipped";
      }
      fm.t_metric = Seconds(tm, Clock::now());
      failures = 0;
    } catch (const std::exception& e) {
      fm.status = fmt::format("error:{}", e.what());
      fm.chamfer_gap = kNaN;
      if (fm.future_status.empty()) fm.future_status = "unavailable";
      ++failures;
    }
    const std::vector<double> kd = field.KDist(), ks = field.KShape();
    fm.k_dist = Summarize(kd);
    fm.k_shape = Summarize(ks);
    res.frames.push_back(std::move(fm));
    if (failures >= kMaxConsecutiveFailures) {
      res.aborted = true;
      break;
    }
  }

  std::vector<double> gaps, es, fs;
  for (const auto& fm : res.frames) {
    gaps.push_back(fm.chamfer_gap);
    if (fm.future_status == "ok") {
      es.push_back(fm.e_t);
      fs.push_back(fm.f_t);
    }
  }
  res.mean_chamfer_gap = FiniteMean(gaps);
  res.mean_e_t = FiniteMean(es);
  res.mean_f_t = FiniteMean(fs);
  res.final_state = x;
  res.final_field = field;
  return res;
}

RecordedSequence SimulateTwinSequence(const ExperimentConfig& cfg) {
  ValidateExperimentConfig(cfg);
  Scenario sc = BuildScenario(cfg);
  return {std::move(sc.mesh), std::move(sc.controls), std::move(sc.clouds)};
}

void WriteMetricsCsv(const ExperimentResult& r, std::ostream& out) {
  out << "frame,chamfer_gap,l_gap,l_hist,l_smooth,l_total,e_t,f_t,horizon,"
         "future_status,k_dist_min,k_dist_mean,k_dist_max,k_shape_min,"
         "k_shape_mean,k_shape_max,mapping_restarts,mapping_fallback,status\n";
  for (const auto& f : r.frames) {
    std::string status = f.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << fmt::format(
        "{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{},{},{:.9g},"
        "{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{},{},{}\n",
        f.frame, f.chamfer_gap, f.l_gap, f.l_hist, f.l_smooth, f.l_total,
        f.e_t, f.f_t, f.horizon, f.future_status, f.k_dist.min, f.k_dist.mean,
        f.k_dist.max, f.k_shape.min, f.k_shape.mean, f.k_shape.max,
        f.mapping_restarts, f.mapping_fallback ? 1 : 0, status);
  }
}

void WriteTimingsCsv(const ExperimentResult& r, std::ostream& out) {
  out << "frame,sim_s,map_s,opt_s,metric_s\n";
  for (const auto& f : r.frames) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", f.frame, f.t_sim,
                       f.t_map, f.t_opt, f.t_metric);
  }
}

void WriteExperimentOutputs(const ExperimentConfig& cfg,
                            const ExperimentResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}/{}", dir, name));
    return f;
  };
  {
    auto f = open("metrics.csv");
    WriteMetricsCsv(r, f);
  }
  {
    auto f = open("timings.csv");
    WriteTimingsCsv(r, f);
  }
  {
    nlohmann::json j;
    j["theta_dist"] = r.final_field.theta_dist;
    j["theta_shape"] = r.final_field.theta_shape;
    j["k_dist"] = r.final_field.KDist();
    j["k_shape"] = r.final_field.KShape();
    j["k_vol"] = r.final_field.k_vol;
    auto f = open("stiffness_final.json");
    f << j.dump(2) << "\n";
  }
  {
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& p : r.final_state) pos.push_back({p.x, p.y, p.z});
    auto f = open("state_final.json");
    f << nlohmann::json{{"positions", pos}}.dump(2) << "\n";
  }
  {
    const auto num = [](double v) {
      return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["method"] = MethodName(cfg.method);
    j["preset"] = StiffnessPresetName(cfg.preset);
    j["seed"] = cfg.seed;
    j["frames"] = r.frames.size();
    j["aborted"] = r.aborted;
    j["sampling_floor"] = num(r.sampling_floor);
    j["mean_chamfer_gap"] = num(r.mean_chamfer_gap);
    j["mean_e_t"] = num(r.mean_e_t);
    j["mean_f_t"] = num(r.mean_f_t);
    j["warnings"] = r.warnings;
    auto f = open("summary.json");
    f << j.dump(2) << "\n";
  }
}

std::vector<SweepCell> RunSweep(const ExperimentConfig& base, int threads) {
  std::vector<SweepCell> cells;
  for (StiffnessPreset p :
       {StiffnessPreset::kK1, StiffnessPreset::kK2, StiffnessPreset::kK3}) {
    for (Method m : {Method::kPbd, Method::kPbdRm, Method::kPbdRmOn}) {
      cells.push_back({p, m, {}, 0.0});
    }
  }
  std::atomic<size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  const auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      try {
        ExperimentConfig cfg = base;
        cfg.preset = cells[i].preset;
        cfg.method = cells[i].method;
        const auto t0 = Clock::now();
        cells[i].result = RunExperiment(cfg);
        cells[i].seconds = Seconds(t0, Clock::now());
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, cells.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return cells;
}

void WriteSweepCsv(const std::vector<SweepCell>& cells, std::ostream& out) {
  out << "preset,method,mean_e_t,mean_f_t,mean_chamfer_gap,frames,aborted\n";
  for (const auto& c : cells) {
    out << fmt::format("{},{},{:.9g},{:.9g},{:.9g},{},{}\n",
                       StiffnessPresetName(c.preset), MethodName(c.method),
                       c.result.mean_e_t, c.result.mean_f_t,
                       c.result.mean_chamfer_gap, c.result.frames.size(),
                       c.result.aborted ? 1 : 0);
  }
}

}  // namespace simtune
