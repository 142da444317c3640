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

#ifndef SIMTUNE_AUTODIFF_H_
#define SIMTUNE_AUTODIFF_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace simtune::ad {

// Reverse-mode tape over scalar primitives. Nodes are appended in evaluation
// order, which is already a topological order, so the backward sweep is a
// single reverse pass that visits each node once.

enum class Op : uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSqrt,
  kExp,
  kLog,
  kLinear,
  kPolar,
};

const char* OpName(Op op);

class Tape {
 public:
  static constexpr uint32_t kNone = UINT32_MAX;

  uint32_t AddLeaf();
  uint32_t AddUnary(Op op, double value, uint32_t a, double da);
  uint32_t AddBinary(Op op, double value, uint32_t a, double da, uint32_t b,
                     double db);
  // Parents equal to kNone are skipped.
  uint32_t AddNary(Op op, double value, std::span<const uint32_t> parents,
                   std::span<const double> partials);

  // Adjoints of every node with respect to `output`.
  std::vector<double> Adjoints(uint32_t output) const;

  size_t size() const { return nodes_.size(); }
  size_t edge_count() const { return parents_.size(); }
  void Clear();
  void Reserve(size_t nodes, size_t edges);

 private:
  struct Node {
    uint32_t first_edge;
    uint32_t edge_count;
    Op op;
  };
  void CheckValue(Op op, double value) const;

  std::vector<Node> nodes_;
  std::vector<uint32_t> parents_;
  std::vector<double> partials_;
};

// The tape new Var operations record onto, per thread. Null when no
// ScopedTape is alive; arithmetic on constants never needs a tape.
Tape* CurrentTape();

class ScopedTape {
 public:
  explicit ScopedTape(Tape* tape);
  ~ScopedTape();
  ScopedTape(const ScopedTape&) = delete;
  ScopedTape& operator=(const ScopedTape&) = delete;

 private:
  Tape* previous_;
};

class Var {
 public:
  static constexpr uint32_t kConstant = Tape::kNone;

  Var() = default;
  Var(double value) : value_(value) {}  // NOLINT: constants convert freely.
  Var(double value, uint32_t id) : value_(value), id_(id) {}

  // A new independent variable on the current tape.
  static Var Input(double value);

  double value() const { return value_; }
  uint32_t id() const { return id_; }
  bool is_constant() const { return id_ == kConstant; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);

 private:
  double value_ = 0.0;
  uint32_t id_ = kConstant;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }

Var sqrt(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);

// sum_i coeffs[i] * terms[i] + offset as a single node.
Var Linear(std::span<const Var> terms, std::span<const double> coeffs,
           double offset = 0.0);

// Records one output of a vector primitive: value plus its partials with
// respect to `inputs`.
Var Custom(Op op, double value, std::span<const Var> inputs,
           std::span<const double> partials);

// Gradient of `output` with respect to `inputs` (which must live on `tape`).
std::vector<double> Gradient(const Tape& tape, const Var& output,
                             std::span<const Var> inputs);

}  // namespace simtune::ad

namespace simtune {

inline double Value(double x) { return x; }
inline double Value(const ad::Var& x) { return x.value(); }

using ScalarFn = std::function<double(std::span<const double>)>;
using TapedFn = std::function<ad::Var(std::span<const ad::Var>)>;

// Reverse-mode gradient of a taped scalar function at `at`. Throws
// GradientNaN naming the primitive on non-finite intermediates.
std::vector<double> GradOfScalar(const TapedFn& f, std::span<const double> at,
                                 double* value = nullptr);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
std::vector<double> FiniteDiffGradient(const ScalarFn& f,
                                       std::span<const double> at, double h);

}  // namespace simtune

#endif  // SIMTUNE_AUTODIFF_H_
