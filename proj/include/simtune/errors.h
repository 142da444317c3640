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

#ifndef SIMTUNE_ERRORS_H_
#define SIMTUNE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace simtune {

// Bad caller input (dimensions, ranges, unknown enum names).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mesh topology or geometry that violates DeformableMesh invariants.
class InvalidMesh : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure in a mesh, config, point cloud or control file. The message
// carries the line or JSON path that failed.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(int iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class MappingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GradientNaN : public std::runtime_error {
 public:
  GradientNaN(const std::string& primitive, const std::string& what)
      : std::runtime_error(what), primitive_(primitive) {}
  const std::string& primitive() const { return primitive_; }

 private:
  std::string primitive_;
};

}  // namespace simtune

#endif  // SIMTUNE_ERRORS_H_
