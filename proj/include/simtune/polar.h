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

#ifndef SIMTUNE_POLAR_H_
#define SIMTUNE_POLAR_H_

#include <cmath>

#include "simtune/autodiff.h"
#include "simtune/vec.h"

namespace simtune {

struct PolarOptions {
  int max_iterations = 20;
  double tolerance = 1e-10;
  // Taped backward through every Higham iteration instead of the closed-form
  // rotation derivative. Same gradient, roughly 50x more tape.
  bool unrolled_backward = false;
};

// Eigenvector of the smallest eigenvalue of a symmetric matrix.
Vec3d SmallestEigenvector(const Mat3d& sym);

namespace internal {

// Scaled Newton (Higham) iteration X <- (g X + X^-T / g) / 2. Converges to
// the orthogonal polar factor, which has det -1 when det(a) < 0.
template <class T>
Mat3<T> HighamOrthogonalFactor(const Mat3<T>& a, const PolarOptions& opts,
                               int* iterations) {
  using std::sqrt;
  Mat3<T> x = a;
  int k = 0;
  for (; k < opts.max_iterations; ++k) {
    const T det = Determinant(x);
    if (std::abs(Value(det)) < 1e-300) break;
    const Mat3<T> cof = Cofactor(x);
    Mat3<T> inv_t;
    for (int i = 0; i < 9; ++i) inv_t.m[i] = cof.m[i] / det;
    const T gamma = sqrt(sqrt(FrobeniusSquared(inv_t) / FrobeniusSquared(x)));
    Mat3<T> next;
    double change = 0.0;
    for (int i = 0; i < 9; ++i) {
      next.m[i] = 0.5 * (gamma * x.m[i] + inv_t.m[i] / gamma);
      const double d = Value(next.m[i]) - Value(x.m[i]);
      change += d * d;
    }
    x = next;
    if (std::sqrt(change) < opts.tolerance) {
      ++k;
      break;
    }
  }
  if (iterations != nullptr) *iterations = k;
  return x;
}

// Householder flip across the weakest stretch direction so that the result
// is the closest proper rotation when the orthogonal factor is a reflection.
inline Mat3d ReflectionFix(const Mat3d& q, const Mat3d& a) {
  Mat3d s = Transpose(q) * a;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double avg = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = avg;
      s(j, i) = avg;
    }
  }
  const Vec3d v = SmallestEigenvector(s);
  Mat3d h = Mat3d::Identity();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) h(i, j) -= 2.0 * v[i] * v[j];
  }
  return h;
}

Mat3<ad::Var> PolarRotationAnalytic(const Mat3<ad::Var>& a,
                                    const Mat3d& rotation);

}  // namespace internal

// Closest rotation (det = +1) to `a`, i.e. the rotation factor of its polar
// decomposition with reflection correction.
inline Mat3d PolarRotation(const Mat3d& a, const PolarOptions& opts = {},
                           int* iterations = nullptr) {
  Mat3d q = internal::HighamOrthogonalFactor(a, opts, iterations);
  if (Determinant(q) < 0.0) q = q * internal::ReflectionFix(q, a);
  return q;
}

inline Mat3<ad::Var> PolarRotation(const Mat3<ad::Var>& a,
                                   const PolarOptions& opts = {},
                                   int* iterations = nullptr) {
  if (opts.unrolled_backward) {
    Mat3<ad::Var> q = internal::HighamOrthogonalFactor(a, opts, iterations);
    const Mat3d qv = ValueOf(q);
    if (Determinant(qv) < 0.0) {
      const Mat3d h = internal::ReflectionFix(qv, ValueOf(a));
      Mat3<ad::Var> hv;
      for (int i = 0; i < 9; ++i) hv.m[i] = h.m[i];
      q = q * hv;
    }
    return q;
  }
  const Mat3d r = PolarRotation(ValueOf(a), opts, iterations);
  return internal::PolarRotationAnalytic(a, r);
}

}  // namespace simtune

#endif  // SIMTUNE_POLAR_H_
