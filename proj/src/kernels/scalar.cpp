// Copyright 2026 The relsim Authors
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

#include <cmath>

#include "tables.hpp"

namespace relsim::kernels::detail {

namespace {

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void axpy(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void gemv(const T* m, std::size_t rows, std::size_t cols, const T* x, T* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(m + r * cols, x, cols);
}

template <typename T>
void gemv_t_acc(const T* m, std::size_t rows, std::size_t cols, const T* v, T* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (v[r] != T{0}) axpy(v[r], m + r * cols, y, cols);
  }
}

template <typename T>
void ger_acc(const T* u, std::size_t rows, const T* v, std::size_t cols, T* m) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != T{0}) axpy(u[r], v, m + r * cols, cols);
  }
}

template <typename T>
T l1_translation(const T* h, const T* r, const T* t, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(h[i] + r[i] - t[i]);
  return acc;
}

template <typename T>
T l2sq_translation(const T* h, const T* r, const T* t, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T d = h[i] + r[i] - t[i];
    acc += d * d;
  }
  return acc;
}

template <typename T>
T trilinear(const T* h, const T* r, const T* t, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += h[i] * r[i] * t[i];
  return acc;
}

template <typename T>
void adam(T* p, const T* g, T* m, T* v, std::size_t n, const AdamCoeffs<T>& c) {
  const T one_b1 = T{1} - c.beta1;
  const T one_b2 = T{1} - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_b1 * g[i];
    v[i] = c.beta2 * v[i] + one_b2 * g[i] * g[i];
    const T mhat = m[i] * c.bias1;
    const T vhat = v[i] * c.bias2;
    p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

template <typename T>
Table<T> make() {
  return Table<T>{&dot<T>,          &axpy<T>,           &gemv<T>,      &gemv_t_acc<T>, &ger_acc<T>,
                  &l1_translation<T>, &l2sq_translation<T>, &trilinear<T>, &adam<T>};
}

}  // namespace

template <>
const Table<float>& scalar_table<float>() {
  static const Table<float> t = make<float>();
  return t;
}

template <>
const Table<double>& scalar_table<double>() {
  static const Table<double> t = make<double>();
  return t;
}

}  // namespace relsim::kernels::detail
