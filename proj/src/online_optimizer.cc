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

#include "simtune/online_optimizer.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

#include "simtune/errors.h"

namespace simtune {
namespace {

struct TapedStiffness {
  std::vector<ad::Var> leaves;  // distance block then shape block
  ConstraintWeights<ad::Var> weights;
};

// Records theta as leaves on the current tape and maps it to weights.
TapedStiffness RecordStiffness(const ConstraintSet& cs,
                               const StiffnessField& field) {
  const int n = field.size();
  const StiffnessBounds& b = field.bounds;
  TapedStiffness t;
  t.leaves.reserve(2 * n);
  for (int i = 0; i < n; ++i) t.leaves.push_back(ad::Var::Input(field.theta_dist[i]));
  for (int i = 0; i < n; ++i) t.leaves.push_back(ad::Var::Input(field.theta_shape[i]));
  std::vector<ad::Var> kd(n), ks(n);
  for (int i = 0; i < n; ++i) {
    kd[i] = MapStiffness(t.leaves[i], b.dist_min, b.dist_max);
    ks[i] = MapStiffness(t.leaves[n + i], b.shape_min, b.shape_max);
  }
  t.weights = StiffnessToConstraintWeights<ad::Var>(cs, kd, ks, field.k_vol);
  return t;
}

ConstraintWeights<double> PlainWeights(const ConstraintSet& cs,
                                       const StiffnessField& field) {
  const std::vector<double> kd = field.KDist();
  const std::vector<double> ks = field.KShape();
  return StiffnessToConstraintWeights<double>(cs, kd, ks, field.k_vol);
}

void Accumulate(std::vector<double>& into, const std::vector<double>& g,
                double weight) {
  for (size_t i = 0; i < into.size(); ++i) into[i] += weight * g[i];
}

}  // namespace

SnapshotBuffer::SnapshotBuffer(int capacity, int samples)
    : capacity_(capacity), samples_(samples) {
  if (capacity < 1 || samples < 1) {
    throw InvalidArgument("snapshot capacity and sample count must be >= 1");
  }
}

void SnapshotBuffer::Push(std::vector<Vec3d> state, int frame) {
  items_.push_back({std::move(state), frame});
  while (static_cast<int>(items_.size()) > capacity_) items_.pop_front();
}

std::vector<size_t> SnapshotBuffer::SampleSlots(std::mt19937_64& rng) const {
  std::vector<size_t> all(items_.size());
  std::iota(all.begin(), all.end(), size_t{0});
  std::vector<size_t> out;
  std::sample(all.begin(), all.end(), std::back_inserter(out),
              std::min<size_t>(samples_, all.size()), rng);
  return out;
}

void AdamStep(OptimizerState& s, std::span<double> theta,
              std::span<const double> grad) {
  if (grad.size() != theta.size()) {
    throw InvalidArgument("gradient and parameter sizes differ");
  }
  if (s.m.size() != theta.size()) {
    s.m.assign(theta.size(), 0.0);
    s.v.assign(theta.size(), 0.0);
  }
  const AdamConfig& c = s.config;
  ++s.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  for (size_t i = 0; i < theta.size(); ++i) {
    s.m[i] = c.beta1 * s.m[i] + (1.0 - c.beta1) * grad[i];
    s.v[i] = c.beta2 * s.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double m_hat = s.m[i] / bc1;
    const double v_hat = s.v[i] / bc2;
    theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    theta[i] = std::clamp(theta[i], -kThetaLimit, kThetaLimit);
  }
}

double FrobeniusNorm(const std::vector<Vec3d>& d) {
  double s = kNormEpsilon * kNormEpsilon;
  for (const auto& r : d) s += SquaredNorm(r);
  return std::sqrt(s);
}

ad::Var FrobeniusNorm(const std::vector<Vec3<ad::Var>>& d) {
  ad::Var s(kNormEpsilon * kNormEpsilon);
  for (const auto& r : d) s += SquaredNorm(r);
  return sqrt(s);
}

std::vector<std::vector<int>> SmoothnessElements(const DeformableMesh& mesh) {
  std::vector<std::vector<int>> out;
  if (mesh.kind == MeshKind::kVolumetric) {
    for (const auto& t : mesh.tetrahedra) out.push_back({t.begin(), t.end()});
  } else {
    for (const auto& t : mesh.triangles) out.push_back({t.begin(), t.end()});
  }
  return out;
}

double LossSmooth(std::span<const double> k,
                  const std::vector<std::vector<int>>& elements) {
  if (elements.empty()) throw InvalidArgument("no smoothness elements");
  double s = 0.0;
  for (const auto& f : elements) {
    for (int i : f) {
      for (int j : f) s += (k[i] - k[j]) * (k[i] - k[j]);
    }
  }
  return s / (2.0 * elements.size());
}

std::vector<double> LossSmoothGradient(
    std::span<const double> k, const std::vector<std::vector<int>>& elements) {
  if (elements.empty()) throw InvalidArgument("no smoothness elements");
  std::vector<double> g(k.size(), 0.0);
  const double scale = 2.0 / elements.size();
  for (const auto& f : elements) {
    for (int i : f) {
      for (int j : f) g[i] += scale * (k[i] - k[j]);
    }
  }
  return g;
}

double LossHistTerm(const DeformableMesh& mesh, const ConstraintSet& cs,
                    const ConstraintWeights<double>& w,
                    const std::vector<Vec3d>& snapshot,
                    const SolverConfig& solver) {
  const std::vector<Vec3d> next =
      PbdStep(mesh, snapshot, Control{}, cs, w, solver);
  std::vector<Vec3d> diff(next.size());
  for (size_t i = 0; i < next.size(); ++i) diff[i] = snapshot[i] - next[i];
  return FrobeniusNorm(diff);
}

LossEvaluation EvaluateLoss(const LossProblem& p, const StiffnessField& field,
                            bool with_gradient) {
  const DeformableMesh& mesh = *p.mesh;
  const ConstraintSet& cs = *p.cs;
  const int n = field.size();
  if (n != mesh.size()) throw InvalidArgument("stiffness field size mismatch");
  LossEvaluation ev;
  if (with_gradient) ev.grad.assign(2 * n, 0.0);

  // Gap: through one solver step and the recorded tail of the mapping.
  if (with_gradient) {
    ad::Tape tape;
    ad::ScopedTape scope(&tape);
    const TapedStiffness ts = RecordStiffness(cs, field);
    const std::vector<Vec3<ad::Var>> xv = PbdStep(
        mesh, Lift<ad::Var>(*p.x_prev), *p.control, cs, ts.weights, p.solver);
    ev.x = ValuesOf(xv);
    ev.mapping = ResidualMap(mesh, ev.x, *p.z, cs, p.residual);
    const std::vector<Vec3<ad::Var>> dv =
        TapedResidualTail(mesh, xv, *p.z, cs, p.residual, ev.mapping);
    const ad::Var gap = FrobeniusNorm(dv);
    ev.terms.gap = gap.value();
    if (p.weights.gap != 0.0) {
      Accumulate(ev.grad, ad::Gradient(tape, gap, ts.leaves), p.weights.gap);
    }
  } else {
    ev.x = PbdStep(mesh, *p.x_prev, *p.control, cs, PlainWeights(cs, field),
                   p.solver);
    ev.mapping = ResidualMap(mesh, ev.x, *p.z, cs, p.residual);
    ev.terms.gap = FrobeniusNorm(ev.mapping.field.delta);
  }

  // History: one tape per snapshot keeps memory bounded.
  for (const std::vector<Vec3d>* h : p.history) {
    if (with_gradient) {
      ad::Tape tape;
      ad::ScopedTape scope(&tape);
      const TapedStiffness ts = RecordStiffness(cs, field);
      const std::vector<Vec3<ad::Var>> next = PbdStep(
          mesh, Lift<ad::Var>(*h), Control{}, cs, ts.weights, p.solver);
      std::vector<Vec3<ad::Var>> diff(next.size());
      for (size_t i = 0; i < next.size(); ++i) {
        const Vec3d& s = (*h)[i];
        diff[i] = Vec3<ad::Var>(ad::Var(s.x), ad::Var(s.y), ad::Var(s.z)) - next[i];
      }
      const ad::Var term = FrobeniusNorm(diff);
      ev.terms.hist += term.value();
      if (p.weights.hist != 0.0) {
        Accumulate(ev.grad, ad::Gradient(tape, term, ts.leaves), p.weights.hist);
      }
    } else {
      ev.terms.hist += LossHistTerm(mesh, cs, PlainWeights(cs, field), *h, p.solver);
    }
  }

  // Smoothness, per family, chained through the sigmoid by hand.
  const std::vector<double> kd = field.KDist();
  const std::vector<double> ks = field.KShape();
  ev.terms.smooth = LossSmooth(kd, *p.elements) + LossSmooth(ks, *p.elements);
  if (with_gradient && p.weights.smooth != 0.0) {
    const std::vector<double> gd = LossSmoothGradient(kd, *p.elements);
    const std::vector<double> gs = LossSmoothGradient(ks, *p.elements);
    const StiffnessBounds& b = field.bounds;
    for (int i = 0; i < n; ++i) {
      const double sd = Sigmoid(field.theta_dist[i]);
      const double ss = Sigmoid(field.theta_shape[i]);
      ev.grad[i] += p.weights.smooth * gd[i] * (b.dist_max - b.dist_min) * sd * (1.0 - sd);
      ev.grad[n + i] += p.weights.smooth * gs[i] * (b.shape_max - b.shape_min) * ss * (1.0 - ss);
    }
  }
  ev.terms.total = p.weights.gap * ev.terms.gap + p.weights.hist * ev.terms.hist +
                   p.weights.smooth * ev.terms.smooth;
  for (double g : ev.grad) {
    if (!std::isfinite(g)) throw GradientNaN("loss", "non-finite loss gradient");
  }
  return ev;
}

StatSummary Summarize(std::span<const double> v) {
  StatSummary s;
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  return s;
}

OnlineOptimizer::OnlineOptimizer(const DeformableMesh& mesh,
                                 const ConstraintSet& cs, StiffnessField field,
                                 const OnlineConfig& cfg, uint64_t seed)
    : mesh_(mesh),
      cs_(cs),
      field_(std::move(field)),
      cfg_(cfg),
      buffer_(cfg.snapshot_capacity, cfg.snapshot_samples),
      rng_(seed),
      elements_(SmoothnessElements(mesh)) {
  state_.config = cfg.adam;
  if (field_.size() != mesh.size()) {
    throw InvalidArgument("stiffness field size mismatch");
  }
}

OnlineStepResult OnlineOptimizer::Step(const std::vector<Vec3d>& x_prev,
                                       const Control& u, const PointCloud& z,
                                       int frame, const SolverConfig& solver,
                                       const ResidualConfig& residual) {
  LossProblem p;
  p.mesh = &mesh_;
  p.cs = &cs_;
  p.x_prev = &x_prev;
  p.control = &u;
  p.z = &z;
  p.elements = &elements_;
  p.solver = solver;
  p.residual = residual;
  p.weights = cfg_.weights;
  for (size_t slot : buffer_.SampleSlots(rng_)) {
    p.history.push_back(&buffer_.at(slot).state);
  }
  LossEvaluation ev = EvaluateLoss(p, field_, /*with_gradient=*/true);

  const int n = field_.size();
  std::vector<double> theta(field_.theta_dist);
  theta.insert(theta.end(), field_.theta_shape.begin(), field_.theta_shape.end());
  AdamStep(state_, theta, ev.grad);
  std::copy(theta.begin(), theta.begin() + n, field_.theta_dist.begin());
  std::copy(theta.begin() + n, theta.end(), field_.theta_shape.begin());

  OnlineStepResult r;
  r.x = std::move(ev.x);
  r.delta = ev.mapping.field.delta;
  r.corrected.resize(r.x.size());
  for (size_t i = 0; i < r.x.size(); ++i) r.corrected[i] = r.x[i] + r.delta[i];
  buffer_.Push(r.corrected, frame);
  r.record.frame = frame;
  r.record.losses = ev.terms;
  r.record.mapping = ev.mapping.report;
  const std::vector<double> kd = field_.KDist();
  const std::vector<double> ks = field_.KShape();
  r.record.k_dist = Summarize(kd);
  r.record.k_shape = Summarize(ks);
  return r;
}

}  // namespace simtune
