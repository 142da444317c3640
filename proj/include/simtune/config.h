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

#ifndef SIMTUNE_CONFIG_H_
#define SIMTUNE_CONFIG_H_

#include <json.hpp>
#include <string>
#include <vector>

#include "simtune/experiment.h"

namespace simtune {

// Named starting points for experiment configs: thin_shell_default,
// volumetric_default, two_region, frozen_pose, offset_keypoints and
// full_scale.
std::vector<std::string> ScenarioNames();
bool IsScenario(const std::string& name);
ExperimentConfig ScenarioConfig(const std::string& name);

// Applies the fields present in `j` on top of `base`. An optional top-level
// "scenario" key selects the base first. Unknown keys and type mismatches
// throw InvalidArgument naming the JSON path, e.g. "$.solver.dt".
ExperimentConfig ParseExperimentConfig(const nlohmann::json& j,
                                       ExperimentConfig base = {});
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Full config, readable back by ParseExperimentConfig.
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg);

}  // namespace simtune

#endif  // SIMTUNE_CONFIG_H_
