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

#ifndef SIMTUNE_GRADCHECK_H_
#define SIMTUNE_GRADCHECK_H_

#include <cstdint>
#include <vector>

namespace simtune {

struct GradCheckConfig {
  int rows = 2;
  int cols = 2;
  int inner_steps = 10;
  double mapping_learning_rate = 10.0;
  // Central difference step in theta.
  double step = 1e-6;
  uint64_t seed = 0;
};

struct GradCheckReport {
  int rows = 0;
  int cols = 0;
  int parameters = 0;
  // |g_tape - g_fd| / |g_fd| over the whole theta vector.
  double relative_error = 0.0;
  // Largest componentwise |g_tape - g_fd| / (|g_fd| + floor).
  double max_component_error = 0.0;
  double gradient_norm = 0.0;
  double seconds = 0.0;
};

// Reverse-mode d L_total / d theta against central finite differences on a
// small thin shell. The loss unrolls one step for the gap term and one step
// for a single history snapshot; the residual mapping is recorded in full.
GradCheckReport RunGradCheck(const GradCheckConfig& cfg);

}  // namespace simtune

#endif  // SIMTUNE_GRADCHECK_H_
