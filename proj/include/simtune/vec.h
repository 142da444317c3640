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

#ifndef SIMTUNE_VEC_H_
#define SIMTUNE_VEC_H_

#include <array>
#include <cmath>
#include <vector>

#include "simtune/autodiff.h"

namespace simtune {

// Small fixed-size algebra generic over the scalar so the same code runs on
// plain doubles and on taped ad::Var.

template <class T>
struct Vec3 {
  T x{}, y{}, z{};

  Vec3() = default;
  Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}
  template <class U>
  explicit Vec3(const Vec3<U>& o) : x(o.x), y(o.y), z(o.z) {}

  T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const T& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Vec3& operator*=(const T& s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
};

using Vec3d = Vec3<double>;

template <class T>
Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <class T>
Vec3<T> operator*(const Vec3<T>& a, const T& s) {
  return {a.x * s, a.y * s, a.z * s};
}
template <class T>
Vec3<T> operator*(const T& s, const Vec3<T>& a) {
  return {a.x * s, a.y * s, a.z * s};
}
inline Vec3<ad::Var> operator*(const Vec3<ad::Var>& a, double s) {
  return a * ad::Var(s);
}
inline Vec3<ad::Var> operator*(double s, const Vec3<ad::Var>& a) {
  return a * ad::Var(s);
}
template <class T>
Vec3<T> operator/(const Vec3<T>& a, const T& s) {
  return {a.x / s, a.y / s, a.z / s};
}
template <class T>
bool operator==(const Vec3<T>& a, const Vec3<T>& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z;
}

template <class T>
T Dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
template <class T>
Vec3<T> Cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}
template <class T>
T SquaredNorm(const Vec3<T>& a) {
  return Dot(a, a);
}
template <class T>
T Norm(const Vec3<T>& a) {
  using std::sqrt;
  return sqrt(Dot(a, a));
}

inline Vec3d ValueOf(const Vec3<ad::Var>& v) {
  return {v.x.value(), v.y.value(), v.z.value()};
}
inline Vec3d ValueOf(const Vec3d& v) { return v; }

template <class T>
std::vector<Vec3d> ValuesOf(const std::vector<Vec3<T>>& v) {
  std::vector<Vec3d> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = ValueOf(v[i]);
  return out;
}

template <class T>
std::vector<Vec3<T>> Lift(const std::vector<Vec3d>& v) {
  std::vector<Vec3<T>> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = Vec3<T>(v[i]);
  return out;
}

// Row-major 3x3 matrix.
template <class T>
struct Mat3 {
  std::array<T, 9> m{};

  T& operator()(int r, int c) { return m[3 * r + c]; }
  const T& operator()(int r, int c) const { return m[3 * r + c]; }

  static Mat3 Identity() {
    Mat3 a;
    a(0, 0) = T(1.0);
    a(1, 1) = T(1.0);
    a(2, 2) = T(1.0);
    return a;
  }
  static Mat3 FromColumns(const Vec3<T>& c0, const Vec3<T>& c1,
                          const Vec3<T>& c2) {
    Mat3 a;
    for (int r = 0; r < 3; ++r) {
      a(r, 0) = c0[r];
      a(r, 1) = c1[r];
      a(r, 2) = c2[r];
    }
    return a;
  }
  Vec3<T> Column(int c) const { return {m[c], m[3 + c], m[6 + c]}; }
};

using Mat3d = Mat3<double>;

template <class T>
Mat3<T> operator*(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> c;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      c(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    }
  }
  return c;
}

template <class T>
Vec3<T> operator*(const Mat3<T>& a, const Vec3<T>& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

template <class T>
Mat3<T> Transpose(const Mat3<T>& a) {
  Mat3<T> t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t(i, j) = a(j, i);
  }
  return t;
}

template <class T>
T Determinant(const Mat3<T>& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Cofactor matrix; inverse-transpose is Cofactor(a) / det(a).
template <class T>
Mat3<T> Cofactor(const Mat3<T>& a) {
  Mat3<T> c;
  c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  c(0, 1) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  c(1, 0) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  c(1, 2) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  c(2, 1) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return c;
}

template <class T>
T FrobeniusSquared(const Mat3<T>& a) {
  T s = a.m[0] * a.m[0];
  for (int i = 1; i < 9; ++i) s += a.m[i] * a.m[i];
  return s;
}

inline Mat3d ValueOf(const Mat3<ad::Var>& a) {
  Mat3d v;
  for (int i = 0; i < 9; ++i) v.m[i] = a.m[i].value();
  return v;
}
inline Mat3d ValueOf(const Mat3d& a) { return a; }

}  // namespace simtune

#endif  // SIMTUNE_VEC_H_
