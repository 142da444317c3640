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

#include "simtune/config.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fstream>
#include <exception>
#include <functional>
#include <map>

#include "simtune/errors.h"

namespace simtune {
namespace {

using nlohmann::json;

// Walks one JSON object, rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) Fail(path_, "expected object");
  }

  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) Fail(Child(key), "unknown key");
    }
  }

  [[noreturn]] static void Fail(const std::string& path, const std::string& msg) {
    throw InvalidArgument(fmt::format("{}: {}", path, msg));
  }

  std::string Child(const std::string& key) const { return path_ + "." + key; }

  const json* Find(const std::string& key) {
    seen_.insert({key, true});
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void Number(const std::string& key, double* out) {
    if (const json* v = Find(key)) {
      if (!v->is_number()) Fail(Child(key), "expected number");
      *out = v->get<double>();
    }
  }

  void Integer(const std::string& key, int* out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_integer()) Fail(Child(key), "expected integer");
      *out = v->get<int>();
    }
  }

  void Unsigned(const std::string& key, uint64_t* out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_unsigned()) Fail(Child(key), "expected non-negative integer");
      *out = v->get<uint64_t>();
    }
  }

  void Bool(const std::string& key, bool* out) {
    if (const json* v = Find(key)) {
      if (!v->is_boolean()) Fail(Child(key), "expected boolean");
      *out = v->get<bool>();
    }
  }

  void String(const std::string& key, std::string* out) {
    if (const json* v = Find(key)) {
      if (!v->is_string()) Fail(Child(key), "expected string");
      *out = v->get<std::string>();
    }
  }

  void Vec3(const std::string& key, Vec3d* out) {
    if (const json* v = Find(key)) {
      if (!v->is_array() || v->size() != 3) Fail(Child(key), "expected [x, y, z]");
      for (int a = 0; a < 3; ++a) {
        if (!(*v)[a].is_number()) Fail(fmt::format("{}[{}]", Child(key), a), "expected number");
      }
      *out = {(*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>()};
    }
  }

  void Object(const std::string& key, const std::function<void(ObjectReader&)>& fn) {
    if (const json* v = Find(key)) {
      ObjectReader sub(*v, Child(key));
      fn(sub);
    }
  }

  // Parses a string field through `parse`, reporting its errors at the path.
  template <class T, class F>
  void Enum(const std::string& key, T* out, F parse) {
    std::string s;
    if (const json* v = Find(key)) {
      if (!v->is_string()) Fail(Child(key), "expected string");
      s = v->get<std::string>();
      try {
        *out = parse(s);
      } catch (const InvalidArgument& e) {
        Fail(Child(key), e.what());
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::map<std::string, bool> seen_;
};

void ReadMesh(ObjectReader& r, MeshSpec* m) {
  r.String("type", &m->type);
  r.Integer("rows", &m->rows);
  r.Integer("cols", &m->cols);
  r.Number("spacing", &m->spacing);
  r.Number("thickness", &m->thickness);
  r.Integer("layers", &m->layers);
  r.String("path", &m->path);
}

void ReadTwin(ObjectReader& r, TwinSpec* t) {
  r.String("pattern", &t->pattern);
  r.Number("k_dist", &t->k_dist);
  r.Number("k_shape", &t->k_shape);
  r.Number("soft_k_dist", &t->soft_k_dist);
  r.Number("stiff_k_dist", &t->stiff_k_dist);
  r.Number("noise_sigma", &t->noise_sigma);
  r.Integer("points", &t->points);
  r.String("trajectory", &t->trajectory);
  r.Number("amplitude", &t->amplitude);
  r.Integer("ramp_frames", &t->ramp_frames);
  r.Bool("model_mismatch", &t->model_mismatch);
  r.Bool("frozen_observation", &t->frozen_observation);
  r.Integer("settle_frames", &t->settle_frames);
  r.String("keypoints", &t->keypoints);
  r.Integer("keypoint_count", &t->keypoint_count);
}

void ReadSolver(ObjectReader& r, SolverConfig* s) {
  r.Number("dt", &s->dt);
  r.Integer("iterations", &s->iterations);
  r.Vec3("gravity", &s->gravity);
  r.Bool("quasi_static", &s->quasi_static);
}

void ReadResidual(ObjectReader& r, ResidualConfig* c) {
  r.Integer("inner_steps", &c->inner_steps);
  r.Number("learning_rate", &c->learning_rate);
  r.Object("realness", [&](ObjectReader& w) {
    w.Number("distance", &c->realness.distance);
    w.Number("volume", &c->realness.volume);
    w.Number("shape", &c->realness.shape);
  });
  r.Integer("max_restarts", &c->max_restarts);
  r.Integer("tape_depth", &c->tape_depth);
  r.Bool("warm_start", &c->warm_start);
}

void ReadOptimizer(ObjectReader& r, OnlineConfig* o) {
  r.Number("learning_rate", &o->adam.learning_rate);
  r.Number("beta1", &o->adam.beta1);
  r.Number("beta2", &o->adam.beta2);
  r.Number("epsilon", &o->adam.epsilon);
  r.Object("weights", [&](ObjectReader& w) {
    w.Number("gap", &o->weights.gap);
    w.Number("hist", &o->weights.hist);
    w.Number("smooth", &o->weights.smooth);
  });
  r.Integer("snapshot_capacity", &o->snapshot_capacity);
  r.Integer("snapshot_samples", &o->snapshot_samples);
}

ExperimentConfig ThinShellDefault() {
  ExperimentConfig c;
  c.mesh.type = "thin_shell";
  c.solver.gravity = {0.0, 0.0, 0.0};
  return c;
}

ExperimentConfig VolumetricDefault() {
  ExperimentConfig c = ThinShellDefault();
  c.mesh.type = "volumetric";
  c.mesh.rows = 8;
  c.mesh.cols = 8;
  c.mesh.thickness = 0.01;
  c.mesh.layers = 2;
  return c;
}

const std::vector<std::pair<std::string, std::function<ExperimentConfig()>>>&
Scenarios() {
  static const std::vector<std::pair<std::string, std::function<ExperimentConfig()>>> kAll = {
      {"thin_shell_default", ThinShellDefault},
      {"volumetric_default", VolumetricDefault},
      {"two_region",
       [] {
         ExperimentConfig c = ThinShellDefault();
         c.twin.pattern = "two_region";
         c.frames = 150;
         c.preset = StiffnessPreset::kK2;
         c.metric_stride = 10;
         return c;
       }},
      {"frozen_pose",
       [] {
         ExperimentConfig c = ThinShellDefault();
         c.twin.frozen_observation = true;
         c.twin.ramp_frames = 1;
         c.twin.settle_frames = 30;
         c.frames = 100;
         c.metric_stride = 10;
         return c;
       }},
      {"offset_keypoints",
       [] {
         ExperimentConfig c = ThinShellDefault();
         c.twin.keypoints = "offset";
         return c;
       }},
      {"full_scale",
       [] {
         ExperimentConfig c = ThinShellDefault();
         c.mesh.rows = 20;
         c.mesh.cols = 30;
         c.mesh.spacing = 0.005;
         c.twin.points = 9000;
         return c;
       }},
  };
  return kAll;
}

}  // namespace

std::vector<std::string> ScenarioNames() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : Scenarios()) out.push_back(name);
  return out;
}

bool IsScenario(const std::string& name) {
  for (const auto& [n, fn] : Scenarios()) {
    if (n == name) return true;
  }
  return false;
}

ExperimentConfig ScenarioConfig(const std::string& name) {
  for (const auto& [n, fn] : Scenarios()) {
    if (n == name) return fn();
  }
  throw InvalidArgument(fmt::format("unknown scenario '{}' (one of: {})", name,
                                    fmt::join(ScenarioNames(), ", ")));
}

ExperimentConfig ParseExperimentConfig(const json& j, ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  ObjectReader r(j, "$");
  if (const json* s = r.Find("scenario")) {
    if (!s->is_string()) ObjectReader::Fail("$.scenario", "expected string");
    try {
      c = ScenarioConfig(s->get<std::string>());
    } catch (const InvalidArgument& e) {
      ObjectReader::Fail("$.scenario", e.what());
    }
  }
  r.Object("mesh", [&](ObjectReader& m) { ReadMesh(m, &c.mesh); });
  r.Object("twin", [&](ObjectReader& t) { ReadTwin(t, &c.twin); });
  r.String("replay_dir", &c.replay_dir);
  r.Enum("method", &c.method, ParseMethod);
  r.Enum("preset", &c.preset, ParseStiffnessPreset);
  r.Object("custom", [&](ObjectReader& k) {
    k.Number("k_dist", &c.custom.k_dist);
    k.Number("k_shape", &c.custom.k_shape);
  });
  r.Integer("frames", &c.frames);
  r.Object("solver", [&](ObjectReader& s) { ReadSolver(s, &c.solver); });
  r.Object("residual", [&](ObjectReader& s) { ReadResidual(s, &c.residual); });
  r.Object("optimizer", [&](ObjectReader& s) { ReadOptimizer(s, &c.online); });
  r.Integer("horizon", &c.horizon);
  r.Integer("metric_stride", &c.metric_stride);
  r.Unsigned("seed", &c.seed);
  r.String("output_dir", &c.output_dir);
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("{}: cannot open", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(fmt::format("{}: {}", path, e.what()));
  }
  return ParseExperimentConfig(j);
}

json ExperimentConfigToJson(const ExperimentConfig& c) {
  json j;
  j["mesh"] = {{"type", c.mesh.type},         {"rows", c.mesh.rows},
               {"cols", c.mesh.cols},         {"spacing", c.mesh.spacing},
               {"thickness", c.mesh.thickness}, {"layers", c.mesh.layers},
               {"path", c.mesh.path}};
  const TwinSpec& t = c.twin;
  j["twin"] = {{"pattern", t.pattern},
               {"k_dist", t.k_dist},
               {"k_shape", t.k_shape},
               {"soft_k_dist", t.soft_k_dist},
               {"stiff_k_dist", t.stiff_k_dist},
               {"noise_sigma", t.noise_sigma},
               {"points", t.points},
               {"trajectory", t.trajectory},
               {"amplitude", t.amplitude},
               {"ramp_frames", t.ramp_frames},
               {"model_mismatch", t.model_mismatch},
               {"frozen_observation", t.frozen_observation},
               {"settle_frames", t.settle_frames},
               {"keypoints", t.keypoints},
               {"keypoint_count", t.keypoint_count}};
  j["replay_dir"] = c.replay_dir;
  j["method"] = MethodName(c.method);
  j["preset"] = StiffnessPresetName(c.preset);
  j["custom"] = {{"k_dist", c.custom.k_dist}, {"k_shape", c.custom.k_shape}};
  j["frames"] = c.frames;
  j["solver"] = {{"dt", c.solver.dt},
                 {"iterations", c.solver.iterations},
                 {"gravity", {c.solver.gravity.x, c.solver.gravity.y, c.solver.gravity.z}},
                 {"quasi_static", c.solver.quasi_static}};
  j["residual"] = {{"inner_steps", c.residual.inner_steps},
                   {"learning_rate", c.residual.learning_rate},
                   {"realness",
                    {{"distance", c.residual.realness.distance},
                     {"volume", c.residual.realness.volume},
                     {"shape", c.residual.realness.shape}}},
                   {"max_restarts", c.residual.max_restarts},
                   {"tape_depth", c.residual.tape_depth},
                   {"warm_start", c.residual.warm_start}};
  j["optimizer"] = {{"learning_rate", c.online.adam.learning_rate},
                    {"beta1", c.online.adam.beta1},
                    {"beta2", c.online.adam.beta2},
                    {"epsilon", c.online.adam.epsilon},
                    {"weights",
                     {{"gap", c.online.weights.gap},
                      {"hist", c.online.weights.hist},
                      {"smooth", c.online.weights.smooth}}},
                    {"snapshot_capacity", c.online.snapshot_capacity},
                    {"snapshot_samples", c.online.snapshot_samples}};
  j["horizon"] = c.horizon;
  j["metric_stride"] = c.metric_stride;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace simtune
