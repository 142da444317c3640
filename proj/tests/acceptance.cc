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

// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "simtune/config.h"
#include "simtune/constraints.h"
#include "simtune/experiment.h"
#include "simtune/geometry.h"
#include "simtune/gradcheck.h"
#include "simtune/metrics.h"
#include "simtune/solver.h"
#include "test_util.h"

namespace simtune {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every mapped stiffness seen by any run, for the bounds check.
struct BoundsLog {
  double kd_min = std::numeric_limits<double>::infinity();
  double kd_max = -std::numeric_limits<double>::infinity();
  double ks_min = std::numeric_limits<double>::infinity();
  double ks_max = -std::numeric_limits<double>::infinity();
  long records = 0;

  void Add(const ExperimentResult& r) {
    for (const auto& f : r.frames) {
      kd_min = std::min(kd_min, f.k_dist.min);
      kd_max = std::max(kd_max, f.k_dist.max);
      ks_min = std::min(ks_min, f.k_shape.min);
      ks_max = std::max(ks_max, f.k_shape.max);
      ++records;
    }
    for (double k : r.final_field.KDist()) kd_min = std::min(kd_min, k), kd_max = std::max(kd_max, k);
    for (double k : r.final_field.KShape()) ks_min = std::min(ks_min, k), ks_max = std::max(ks_max, k);
  }
};

BoundsLog g_bounds;

ExperimentResult Run(const ExperimentConfig& cfg) {
  ExperimentResult r = RunExperiment(cfg);
  g_bounds.Add(r);
  return r;
}

Outcome GradientFidelity() {
  const auto start = Clock::now();
  double worst = 0.0, worst_norm = 0.0;
  std::string sizes;
  for (int side : {2, 4}) {
    GradCheckConfig cfg;
    cfg.rows = cfg.cols = side;
    const GradCheckReport r = RunGradCheck(cfg);
    worst = std::max(worst, r.max_component_error);
    worst_norm = std::max(worst_norm, r.relative_error);
    sizes += fmt::format(" {}x{}: max {:.2e} norm {:.2e};", side, side, r.max_component_error,
                         r.relative_error);
  }
  const double secs = Seconds(start);
  return {worst <= 1e-3 && secs < 60.0,
          fmt::format("{} runtime {:.1f} s (need <= 1e-3, < 60 s)", sizes, secs)};
}

Outcome MappingEfficacy() {
  std::string detail;
  bool pass = true;
  for (const auto& [scenario, limit] :
       {std::pair<std::string, double>{"thin_shell_default", 0.25}, {"volumetric_default", 0.5}}) {
    ExperimentConfig cfg = ScenarioConfig(scenario);
    cfg.twin.noise_sigma = 0.0;
    cfg.metric_stride = cfg.frames + 1;
    cfg.method = Method::kPbd;
    const double pbd = Run(cfg).mean_chamfer_gap;
    cfg.method = Method::kPbdRm;
    const double rm = Run(cfg).mean_chamfer_gap;
    const double ratio = rm / pbd;
    pass = pass && ratio <= limit;
    detail += fmt::format(" {}: PBD {:.3e} PBD-RM {:.3e} ratio {:.3f} (need <= {});", scenario,
                          pbd, rm, ratio, limit);
  }
  return {pass, detail};
}

Outcome MethodOrdering() {
  std::string detail;
  bool pass = true;
  const int threads = std::max(1u, std::thread::hardware_concurrency());
  for (const std::string scenario : {"thin_shell_default", "volumetric_default"}) {
    const auto start = Clock::now();
    const auto cells = RunSweep(ScenarioConfig(scenario), threads);
    const double secs = Seconds(start);
    int ordered = 0;
    std::string rows;
    for (int p = 0; p < 3; ++p) {
      const double pbd = cells[3 * p].result.mean_e_t;
      const double rm = cells[3 * p + 1].result.mean_e_t;
      const double on = cells[3 * p + 2].result.mean_e_t;
      for (int m = 0; m < 3; ++m) g_bounds.Add(cells[3 * p + m].result);
      const bool ok = on < rm && rm < pbd;
      ordered += ok;
      rows += fmt::format(" {} {:.4f}/{:.4f}/{:.4f}{}", StiffnessPresetName(cells[3 * p].preset),
                          on, rm, pbd, ok ? "" : "(x)");
    }
    pass = pass && ordered >= 2 && secs < 15 * 60;
    detail += fmt::format(" {}: {}/3 ordered [ON/RM/PBD e_t:{}] in {:.0f} s;", scenario,
                          ordered, rows, secs);
  }
  return {pass, detail + " (need >= 2/3 per twin, < 900 s each)"};
}

Outcome OnlineImprovement() {
  ExperimentConfig cfg = ScenarioConfig("frozen_pose");
  cfg.method = Method::kPbdRmOn;
  const ExperimentResult r = Run(cfg);
  if (r.frames.size() < 100) return {false, "run ended early"};
  // Trailing 20-frame average ending at frames 20 and 100 (1-based).
  const auto avg = [&](int end) {
    double s = 0.0;
    for (int t = end - 20; t < end; ++t) s += r.frames[t].l_gap;
    return s / 20.0;
  };
  const double early = avg(20), late = avg(100);
  return {late <= 0.7 * early,
          fmt::format(" L_gap avg@20 {:.4e} avg@100 {:.4e} ratio {:.3f} (need <= 0.7)", early,
                      late, late / early)};
}

Outcome ParameterRecovery() {
  ExperimentConfig cfg = ScenarioConfig("two_region");
  cfg.method = Method::kPbdRmOn;
  const ExperimentResult r = Run(cfg);
  const DeformableMesh mesh = BuildMesh(cfg.mesh);
  const auto soft = SoftRegionMask(mesh);
  const auto k = r.final_field.KDist();
  double s = 0.0, h = 0.0;
  int ns = 0, nh = 0;
  for (int i = 0; i < mesh.size(); ++i) {
    (soft[i] ? s : h) += k[i];
    ++(soft[i] ? ns : nh);
  }
  s /= ns;
  h /= nh;
  return {s < h && !r.aborted,
          fmt::format(" mean k_dist soft {:.4f} stiff {:.4f} after {} frames (need soft < stiff)",
                      s, h, r.frames.size())};
}

Outcome XpbdSuite() {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  SolverConfig solver;
  solver.gravity = {0, 0, 0};
  std::string detail;
  bool pass = true;

  // Two unit masses 2 apart with rest length 1 meet at 0.5 and 1.5.
  {
    const DeformableMesh m = testing::PointMesh({{0, 0, 0}, {1, 0, 0}}, {{0, 1}});
    ConstraintOptions opts;
    opts.shape = false;
    const ConstraintSet cs = BuildConstraints(m, opts);
    SolverConfig one = solver;
    one.iterations = 1;
    const auto y = PbdStep(m, {{0, 0, 0}, {2, 0, 0}}, Control{}, cs, UniformWeights(cs, kInf, 0, 0), one);
    const double err = std::max(std::abs(y[0].x - 0.5), std::abs(y[1].x - 1.5));
    pass = pass && err <= 1e-12;
    detail += fmt::format(" hand update err {:.1e};", err);
  }

  // Infinite distance and volume stiffness on meshes of 4 to 100 particles,
  // each started from its rest shape with 0.5 mm random offsets.
  {
    std::vector<DeformableMesh> meshes;
    for (int side = 2; side <= 10; ++side) meshes.push_back(BuildGridShell(side, side, 0.01));
    for (const auto& [side, layers] : {std::pair{2, 1}, {3, 1}, {3, 2}, {4, 2}, {5, 2}, {5, 3}}) {
      meshes.push_back(ExtrudeToVolumetric(BuildGridShell(side, side, 0.01), 0.01, layers));
    }
    std::mt19937_64 rng(8);
    double worst = 0.0, start = 0.0;
    int worst_n = 0;
    solver.iterations = 20;
    for (const auto& m : meshes) {
      ConstraintOptions opts;
      opts.shape = false;
      const ConstraintSet cs = BuildConstraints(m, opts);
      for (int trial = 0; trial < 5; ++trial) {
        const auto x = testing::Perturbed(m.rest_positions, rng, 0.0005);
        for (double c : ConstraintValues(cs, x)) start = std::max(start, std::abs(c));
        const auto y = PbdStep(m, x, Control{}, cs, UniformWeights(cs, kInf, kInf, 0), solver);
        for (double c : ConstraintValues(cs, y)) {
          if (std::abs(c) > worst) worst = std::abs(c), worst_n = m.size();
        }
      }
    }
    pass = pass && worst < 1e-6;
    detail += fmt::format(" infinite-stiffness max|C| {:.1e} from {:.1e} (worst at {} particles, need < 1e-6);",
                          worst, start, worst_n);
  }

  const DeformableMesh shell = BuildGridShell(4, 5, 0.01);
  const DeformableMesh solid = ExtrudeToVolumetric(BuildGridShell(3, 4, 0.01), 0.01, 2);
  const ConstraintSet cs_shell = BuildConstraints(shell), cs_solid = BuildConstraints(solid);
  {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const bool vol = trial % 2 == 1;
      const DeformableMesh& m = vol ? solid : shell;
      const Mat3d rot = testing::RandomRotation(rng);
      const Vec3d t = testing::RandomVec(rng, 1.0);
      std::vector<Vec3d> x(m.size());
      for (int i = 0; i < m.size(); ++i) x[i] = rot * m.rest_positions[i] + t;
      for (double c : ConstraintValues(vol ? cs_solid : cs_shell, x)) worst = std::max(worst, std::abs(c));
    }
    pass = pass && worst < 1e-9;
    detail += fmt::format(" rigid-motion max|C| {:.1e} (1000 cases);", worst);
  }
  {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const bool vol = trial % 2 == 1;
      const DeformableMesh& m = vol ? solid : shell;
      const auto x = testing::Perturbed(m.rest_positions, rng, 0.003);
      for (const auto& row : ConstraintJacobian(vol ? cs_solid : cs_shell, x)) {
        Vec3d sum;
        for (const auto& [i, g] : row.entries) sum += g;
        worst = std::max(worst, Norm(sum));
      }
    }
    pass = pass && worst < 1e-9;
    detail += fmt::format(" translation null space max {:.1e} (1000 cases)", worst);
  }
  return {pass, detail};
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Determinism() {
  ExperimentConfig cfg = ScenarioConfig("thin_shell_default");
  cfg.frames = 15;
  cfg.seed = 7;
  const fs::path root = fs::temp_directory_path() / "simtune_acceptance_determinism";
  fs::remove_all(root);
  bool pass = true;
  std::string detail;
  for (Method m : {Method::kPbd, Method::kPbdRm, Method::kPbdRmOn}) {
    cfg.method = m;
    std::string csv[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = root / fmt::format("{}_{}", MethodName(m), k);
      WriteExperimentOutputs(cfg, Run(cfg), dir.string());
      csv[k] = ReadFile(dir / "metrics.csv");
    }
    const bool same = !csv[0].empty() && csv[0] == csv[1];
    pass = pass && same;
    detail += fmt::format(" {} {} bytes {};", MethodName(m), csv[0].size(),
                          same ? "identical" : "DIFFERENT");
  }
  return {pass, detail};
}

Outcome KeypointOracle() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(1, 40);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng), k = size(rng);
    std::vector<Vec3d> x0(n), xT(n), p0(k), pT(k);
    for (int i = 0; i < n; ++i) {
      x0[i] = testing::RandomVec(rng);
      xT[i] = x0[i] + testing::RandomVec(rng, 0.1);
    }
    for (int j = 0; j < k; ++j) {
      p0[j] = testing::RandomVec(rng);
      pT[j] = p0[j] + testing::RandomVec(rng, 0.1);
    }
    double brute = 0.0;
    for (int j = 0; j < k; ++j) {
      int nn = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        const double d = std::pow(x0[i].x - p0[j].x, 2) + std::pow(x0[i].y - p0[j].y, 2) +
                         std::pow(x0[i].z - p0[j].z, 2);
        if (d < best) best = d, nn = i;
      }
      const double ex = pT[j].x - (xT[nn].x - x0[nn].x + p0[j].x);
      const double ey = pT[j].y - (xT[nn].y - x0[nn].y + p0[j].y);
      const double ez = pT[j].z - (xT[nn].z - x0[nn].z + p0[j].z);
      brute += std::sqrt(ex * ex + ey * ey + ez * ez);
    }
    worst = std::max(worst, std::abs(FutureKeypointError(x0, xT, p0, pT) - brute));
  }
  return {worst <= 1e-9, fmt::format(" max |f - f_brute| {:.1e} over 100 cases (need <= 1e-9)", worst)};
}

Outcome BoundsSafety() {
  const auto& b = g_bounds;
  const bool pass = b.records > 0 && b.kd_min > 0.0 && b.kd_max < 10.0 && b.ks_min > 0.0 &&
                    b.ks_max < 0.02;
  return {pass, fmt::format(" {} frame records; k_dist in [{:.4g}, {:.4g}], k_shape in [{:.4g}, {:.4g}]",
                            b.records, b.kd_min, b.kd_max, b.ks_min, b.ks_max)};
}

}  // namespace
}  // namespace simtune

int main() {
  using namespace simtune;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient fidelity", GradientFidelity},
      {"residual mapping efficacy", MappingEfficacy},
      {"method ordering", MethodOrdering},
      {"online improvement", OnlineImprovement},
      {"parameter recovery direction", ParameterRecovery},
      {"XPBD correctness suite", XpbdSuite},
      {"determinism", Determinism},
      {"future keypoint oracle", KeypointOracle},
      {"bounds safety", BoundsSafety},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format(" exception: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("criterion {} {}: {} [{:.1f} s]{}\n", i + 1, criteria[i].first,
               o.pass ? "PASS" : "FAIL", Seconds(start), o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
