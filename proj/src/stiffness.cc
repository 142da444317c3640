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

#include "simtune/stiffness.h"

#include <fmt/format.h>

#include "simtune/errors.h"

namespace simtune {
namespace {

constexpr double kShapeClamp = 0.0199;

double ThetaFor(double k, double lo, double hi, const char* family) {
  if (!(k > lo && k < hi)) {
    throw InvalidArgument(fmt::format("{} stiffness {} outside ({}, {})",
                                      family, k, lo, hi));
  }
  return Logit((k - lo) / (hi - lo));
}

}  // namespace

std::vector<double> StiffnessField::KDist() const {
  std::vector<double> k(theta_dist.size());
  for (size_t i = 0; i < k.size(); ++i) {
    k[i] = MapStiffness(theta_dist[i], bounds.dist_min, bounds.dist_max);
  }
  return k;
}

std::vector<double> StiffnessField::KShape() const {
  std::vector<double> k(theta_shape.size());
  for (size_t i = 0; i < k.size(); ++i) {
    k[i] = MapStiffness(theta_shape[i], bounds.shape_min, bounds.shape_max);
  }
  return k;
}

StiffnessField StiffnessField::Uniform(int n, double k_dist, double k_shape,
                                       const StiffnessBounds& bounds) {
  StiffnessField f;
  f.bounds = bounds;
  f.theta_dist.assign(
      n, ThetaFor(k_dist, bounds.dist_min, bounds.dist_max, "distance"));
  f.theta_shape.assign(
      n, ThetaFor(k_shape, bounds.shape_min, bounds.shape_max, "shape"));
  return f;
}

StiffnessField StiffnessField::FromStiffness(std::span<const double> k_dist,
                                             std::span<const double> k_shape,
                                             const StiffnessBounds& bounds) {
  if (k_dist.size() != k_shape.size()) {
    throw InvalidArgument("stiffness families differ in length");
  }
  StiffnessField f;
  f.bounds = bounds;
  for (size_t i = 0; i < k_dist.size(); ++i) {
    f.theta_dist.push_back(
        ThetaFor(k_dist[i], bounds.dist_min, bounds.dist_max, "distance"));
    f.theta_shape.push_back(
        ThetaFor(k_shape[i], bounds.shape_min, bounds.shape_max, "shape"));
  }
  return f;
}

StiffnessPreset ParseStiffnessPreset(const std::string& name) {
  if (name == "k1") return StiffnessPreset::kK1;
  if (name == "k2") return StiffnessPreset::kK2;
  if (name == "k3") return StiffnessPreset::kK3;
  if (name == "custom") return StiffnessPreset::kCustom;
  throw InvalidArgument(fmt::format("unknown stiffness preset '{}'", name));
}

std::string StiffnessPresetName(StiffnessPreset preset) {
  switch (preset) {
    case StiffnessPreset::kK1: return "k1";
    case StiffnessPreset::kK2: return "k2";
    case StiffnessPreset::kK3: return "k3";
    case StiffnessPreset::kCustom: return "custom";
  }
  return "custom";
}

StiffnessField InitStiffness(StiffnessPreset preset, int n,
                             PresetValues custom,
                             const StiffnessBounds& bounds,
                             std::vector<std::string>* warnings) {
  PresetValues v = custom;
  switch (preset) {
    case StiffnessPreset::kK1: v = {5.0, 0.15}; break;
    case StiffnessPreset::kK2: v = {1.0, 0.1}; break;
    case StiffnessPreset::kK3: v = {0.2, 0.005}; break;
    case StiffnessPreset::kCustom:
      return StiffnessField::Uniform(n, v.k_dist, v.k_shape, bounds);
  }
  if (v.k_shape >= bounds.shape_max) {
    const double clamped = std::min(kShapeClamp, 0.995 * bounds.shape_max);
    if (warnings != nullptr) {
      warnings->push_back(fmt::format(
          "preset {} k_shape={} exceeds bound {}; clamped to {}",
          StiffnessPresetName(preset), v.k_shape, bounds.shape_max, clamped));
    }
    v.k_shape = clamped;
  }
  return StiffnessField::Uniform(n, v.k_dist, v.k_shape, bounds);
}

}  // namespace simtune
