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

#include "simtune/polar.h"

#include <array>
#include <cmath>

namespace simtune {

Vec3d SmallestEigenvector(const Mat3d& sym) {
  // Cyclic Jacobi; 3x3 converges in a handful of sweeps.
  Mat3d a = sym;
  Mat3d v = Mat3d::Identity();
  for (int sweep = 0; sweep < 50; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat3d rot = Mat3d::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = Transpose(rot) * a * rot;
        v = v * rot;
      }
    }
  }
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (a(i, i) < a(k, k)) k = i;
  }
  return v.Column(k);
}

namespace internal {

// For R = polar(A) with S = R^T A symmetric, dR = R [w]_x where
// w = (tr(S) I - S)^-1 vee(R^T dA - dA^T R).
Mat3<ad::Var> PolarRotationAnalytic(const Mat3<ad::Var>& a,
                                    const Mat3d& rotation) {
  const Mat3d& r = rotation;
  Mat3d s = Transpose(r) * ValueOf(a);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double avg = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = avg;
      s(j, i) = avg;
    }
  }
  const double tr = s(0, 0) + s(1, 1) + s(2, 2);
  Mat3d m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = (i == j ? tr : 0.0) - s(i, j);
  }
  const double det = Determinant(m);
  Mat3d g = Transpose(Cofactor(m));
  for (double& e : g.m) e /= det;

  // partials[ij][kl] = d R_ij / d A_kl
  std::array<std::array<double, 9>, 9> partials{};
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      // R^T E_kl has column l equal to row k of R; K = R^T E - (R^T E)^T.
      Mat3d rte;
      for (int i = 0; i < 3; ++i) rte(i, l) = r(k, i);
      const Mat3d kk = [&] {
        Mat3d out;
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) out(i, j) = rte(i, j) - rte(j, i);
        }
        return out;
      }();
      const Vec3d vee{kk(2, 1), kk(0, 2), kk(1, 0)};
      const Vec3d w = g * vee;
      Mat3d wx;
      wx(0, 1) = -w.z;
      wx(0, 2) = w.y;
      wx(1, 0) = w.z;
      wx(1, 2) = -w.x;
      wx(2, 0) = -w.y;
      wx(2, 1) = w.x;
      const Mat3d dr = r * wx;
      for (int ij = 0; ij < 9; ++ij) partials[ij][3 * k + l] = dr.m[ij];
    }
  }
  Mat3<ad::Var> out;
  for (int ij = 0; ij < 9; ++ij) {
    out.m[ij] = ad::Custom(ad::Op::kPolar, r.m[ij], a.m, partials[ij]);
  }
  return out;
}

}  // namespace internal
}  // namespace simtune
