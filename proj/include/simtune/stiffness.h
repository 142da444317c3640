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

#ifndef SIMTUNE_STIFFNESS_H_
#define SIMTUNE_STIFFNESS_H_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "simtune/autodiff.h"

namespace simtune {

inline constexpr double kVolumeStiffness = 1e10;
// |theta| beyond this maps to the bound itself in double precision.
inline constexpr double kThetaLimit = 30.0;

struct StiffnessBounds {
  double dist_min = 0.0;
  double dist_max = 10.0;
  double shape_min = 0.0;
  double shape_max = 0.02;
};

template <class T>
T Sigmoid(const T& t) {
  using std::exp;
  if (Value(t) >= 0.0) return T(1.0) / (T(1.0) + exp(-t));
  const T e = exp(t);
  return e / (T(1.0) + e);
}

inline double Logit(double p) { return std::log(p / (1.0 - p)); }

// k = lo + (hi - lo) sigmoid(theta).
template <class T>
T MapStiffness(const T& theta, double lo, double hi) {
  return T(lo) + T(hi - lo) * Sigmoid(theta);
}

// Per-particle unconstrained parameters for the distance and shape families.
struct StiffnessField {
  std::vector<double> theta_dist;
  std::vector<double> theta_shape;
  StiffnessBounds bounds;
  double k_vol = kVolumeStiffness;

  int size() const { return static_cast<int>(theta_dist.size()); }
  std::vector<double> KDist() const;
  std::vector<double> KShape() const;
  // Uniform field mapping to the given stiffness values. Throws
  // InvalidArgument when a value is outside the open bound interval.
  static StiffnessField Uniform(int n, double k_dist, double k_shape,
                                const StiffnessBounds& bounds = {});
  static StiffnessField FromStiffness(std::span<const double> k_dist,
                                      std::span<const double> k_shape,
                                      const StiffnessBounds& bounds = {});
};

enum class StiffnessPreset { kK1, kK2, kK3, kCustom };

StiffnessPreset ParseStiffnessPreset(const std::string& name);
std::string StiffnessPresetName(StiffnessPreset preset);

struct PresetValues {
  double k_dist = 0.0;
  double k_shape = 0.0;
};

// k1 {5, 0.15}, k2 {1, 0.1}, k3 {0.2, 0.005}. Shape values above the bound
// are clamped to 0.0199 and a warning is appended.
StiffnessField InitStiffness(StiffnessPreset preset, int n,
                             PresetValues custom = {},
                             const StiffnessBounds& bounds = {},
                             std::vector<std::string>* warnings = nullptr);

}  // namespace simtune

#endif  // SIMTUNE_STIFFNESS_H_
