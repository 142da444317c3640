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

#include "simtune/autodiff.h"

#include <fmt/format.h>

#include <array>
#include <cmath>

#include "simtune/errors.h"

namespace simtune::ad {
namespace {

thread_local Tape* g_tape = nullptr;

Tape& RequireTape() {
  if (g_tape == nullptr) {
    throw std::logic_error("Var operation on a non-constant without a tape");
  }
  return *g_tape;
}

Var Unary(Op op, double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  return Var(value, RequireTape().AddUnary(op, value, a.id(), da));
}

Var Binary(Op op, double value, const Var& a, double da, const Var& b,
           double db) {
  if (a.is_constant() && b.is_constant()) return Var(value);
  Tape& tape = RequireTape();
  if (a.is_constant()) return Var(value, tape.AddUnary(op, value, b.id(), db));
  if (b.is_constant()) return Var(value, tape.AddUnary(op, value, a.id(), da));
  return Var(value, tape.AddBinary(op, value, a.id(), da, b.id(), db));
}

}  // namespace

const char* OpName(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kNeg: return "neg";
    case Op::kSqrt: return "sqrt";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kLinear: return "linear";
    case Op::kPolar: return "polar";
  }
  return "unknown";
}

void Tape::CheckValue(Op op, double value) const {
  if (!std::isfinite(value)) {
    throw GradientNaN(OpName(op),
                      fmt::format("non-finite value produced by '{}' at tape "
                                  "node {}",
                                  OpName(op), nodes_.size()));
  }
}

uint32_t Tape::AddLeaf() {
  nodes_.push_back({static_cast<uint32_t>(parents_.size()), 0, Op::kLeaf});
  return static_cast<uint32_t>(nodes_.size() - 1);
}

uint32_t Tape::AddUnary(Op op, double value, uint32_t a, double da) {
  CheckValue(op, value);
  nodes_.push_back({static_cast<uint32_t>(parents_.size()), 1, op});
  parents_.push_back(a);
  partials_.push_back(da);
  return static_cast<uint32_t>(nodes_.size() - 1);
}

uint32_t Tape::AddBinary(Op op, double value, uint32_t a, double da,
                         uint32_t b, double db) {
  CheckValue(op, value);
  nodes_.push_back({static_cast<uint32_t>(parents_.size()), 2, op});
  parents_.push_back(a);
  parents_.push_back(b);
  partials_.push_back(da);
  partials_.push_back(db);
  return static_cast<uint32_t>(nodes_.size() - 1);
}

uint32_t Tape::AddNary(Op op, double value, std::span<const uint32_t> parents,
                       std::span<const double> partials) {
  CheckValue(op, value);
  const auto first = static_cast<uint32_t>(parents_.size());
  for (size_t i = 0; i < parents.size(); ++i) {
    if (parents[i] == kNone) continue;
    parents_.push_back(parents[i]);
    partials_.push_back(partials[i]);
  }
  nodes_.push_back(
      {first, static_cast<uint32_t>(parents_.size()) - first, op});
  return static_cast<uint32_t>(nodes_.size() - 1);
}

std::vector<double> Tape::Adjoints(uint32_t output) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (output == kNone) return adj;
  adj[output] = 1.0;
  for (int64_t i = output; i >= 0; --i) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const Node& node = nodes_[i];
    if (!std::isfinite(a)) {
      throw GradientNaN(OpName(node.op),
                        fmt::format("non-finite adjoint at '{}' (node {})",
                                    OpName(node.op), i));
    }
    const uint32_t end = node.first_edge + node.edge_count;
    for (uint32_t e = node.first_edge; e < end; ++e) {
      const double p = partials_[e];
      if (!std::isfinite(p)) {
        throw GradientNaN(OpName(node.op),
                          fmt::format("non-finite partial in '{}' (node {})",
                                      OpName(node.op), i));
      }
      adj[parents_[e]] += p * a;
    }
  }
  return adj;
}

void Tape::Clear() {
  nodes_.clear();
  parents_.clear();
  partials_.clear();
}

void Tape::Reserve(size_t nodes, size_t edges) {
  nodes_.reserve(nodes);
  parents_.reserve(edges);
  partials_.reserve(edges);
}

Tape* CurrentTape() { return g_tape; }

ScopedTape::ScopedTape(Tape* tape) : previous_(g_tape) { g_tape = tape; }
ScopedTape::~ScopedTape() { g_tape = previous_; }

Var Var::Input(double value) { return Var(value, RequireTape().AddLeaf()); }

Var& Var::operator+=(const Var& o) { return *this = *this + o; }
Var& Var::operator-=(const Var& o) { return *this = *this - o; }
Var& Var::operator*=(const Var& o) { return *this = *this * o; }
Var& Var::operator/=(const Var& o) { return *this = *this / o; }

Var operator+(const Var& a, const Var& b) {
  return Binary(Op::kAdd, a.value() + b.value(), a, 1.0, b, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  return Binary(Op::kSub, a.value() - b.value(), a, 1.0, b, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  return Binary(Op::kMul, a.value() * b.value(), a, b.value(), b, a.value());
}

Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.value();
  const double q = a.value() / b.value();
  return Binary(Op::kDiv, q, a, inv, b, -q * inv);
}

Var operator-(const Var& a) { return Unary(Op::kNeg, -a.value(), a, -1.0); }

Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  return Unary(Op::kSqrt, s, a, 0.5 / s);
}

Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return Unary(Op::kExp, e, a, e);
}

Var log(const Var& a) {
  return Unary(Op::kLog, std::log(a.value()), a, 1.0 / a.value());
}

Var Linear(std::span<const Var> terms, std::span<const double> coeffs,
           double offset) {
  double value = offset;
  bool all_constant = true;
  for (size_t i = 0; i < terms.size(); ++i) {
    value += coeffs[i] * terms[i].value();
    all_constant = all_constant && terms[i].is_constant();
  }
  if (all_constant) return Var(value);
  return Custom(Op::kLinear, value, terms, coeffs);
}

Var Custom(Op op, double value, std::span<const Var> inputs,
           std::span<const double> partials) {
  constexpr size_t kInline = 32;
  std::array<uint32_t, kInline> small;
  std::vector<uint32_t> large;
  std::span<uint32_t> ids;
  if (inputs.size() <= kInline) {
    ids = std::span<uint32_t>(small.data(), inputs.size());
  } else {
    large.resize(inputs.size());
    ids = large;
  }
  bool any = false;
  for (size_t i = 0; i < inputs.size(); ++i) {
    ids[i] = inputs[i].id();
    any = any || !inputs[i].is_constant();
  }
  if (!any) return Var(value);
  return Var(value, RequireTape().AddNary(op, value, ids, partials));
}

std::vector<double> Gradient(const Tape& tape, const Var& output,
                             std::span<const Var> inputs) {
  std::vector<double> grad(inputs.size(), 0.0);
  if (output.is_constant()) return grad;
  const std::vector<double> adj = tape.Adjoints(output.id());
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].is_constant()) grad[i] = adj[inputs[i].id()];
  }
  return grad;
}

}  // namespace simtune::ad

namespace simtune {

std::vector<double> GradOfScalar(const TapedFn& f, std::span<const double> at,
                                 double* value) {
  ad::Tape tape;
  ad::ScopedTape scope(&tape);
  std::vector<ad::Var> inputs;
  inputs.reserve(at.size());
  for (double x : at) inputs.push_back(ad::Var::Input(x));
  const ad::Var out = f(inputs);
  if (value != nullptr) *value = out.value();
  return ad::Gradient(tape, out, inputs);
}

std::vector<double> FiniteDiffGradient(const ScalarFn& f,
                                       std::span<const double> at, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite difference step must be > 0");
  std::vector<double> x(at.begin(), at.end());
  std::vector<double> grad(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f(x);
    x[i] = saved - h;
    const double minus = f(x);
    x[i] = saved;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

}  // namespace simtune
