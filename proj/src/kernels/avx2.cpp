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

#include <immintrin.h>

#include <cmath>

#include "tables.hpp"

namespace relsim::kernels::detail {

namespace {

template <typename T>
struct Lanes;

template <>
struct Lanes<float> {
  using reg = __m256;
  static constexpr std::size_t width = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg set1(float x) { return _mm256_set1_ps(x); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg x) { _mm256_storeu_ps(p, x); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static reg div(reg a, reg b) { return _mm256_div_ps(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg sqrt(reg a) { return _mm256_sqrt_ps(a); }
  static reg abs(reg a) { return _mm256_andnot_ps(_mm256_set1_ps(-0.0f), a); }
  static float hsum(reg a) {
    __m128 lo = _mm256_castps256_ps128(a);
    __m128 hi = _mm256_extractf128_ps(a, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
  }
};

template <>
struct Lanes<double> {
  using reg = __m256d;
  static constexpr std::size_t width = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg set1(double x) { return _mm256_set1_pd(x); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg x) { _mm256_storeu_pd(p, x); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg div(reg a, reg b) { return _mm256_div_pd(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg sqrt(reg a) { return _mm256_sqrt_pd(a); }
  static reg abs(reg a) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a); }
  static double hsum(reg a) {
    __m128d lo = _mm256_castpd256_pd128(a);
    __m128d hi = _mm256_extractf128_pd(a, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d high64 = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
  }
};

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  using L = Lanes<T>;
  constexpr std::size_t W = L::width;
  auto acc0 = L::zero();
  auto acc1 = L::zero();
  std::size_t i = 0;
  for (; i + 2 * W <= n; i += 2 * W) {
    acc0 = L::fmadd(L::load(a + i), L::load(b + i), acc0);
    acc1 = L::fmadd(L::load(a + i + W), L::load(b + i + W), acc1);
  }
  for (; i + W <= n; i += W) acc0 = L::fmadd(L::load(a + i), L::load(b + i), acc0);
  T acc = L::hsum(L::add(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void axpy(T a, const T* x, T* y, std::size_t n) {
  using L = Lanes<T>;
  constexpr std::size_t W = L::width;
  const auto va = L::set1(a);
  std::size_t i = 0;
  for (; i + W <= n; i += W) L::store(y + i, L::fmadd(va, L::load(x + i), L::load(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
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
  using L = Lanes<T>;
  constexpr std::size_t W = L::width;
  auto acc = L::zero();
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    acc = L::add(acc, L::abs(L::sub(L::add(L::load(h + i), L::load(r + i)), L::load(t + i))));
  }
  T out = L::hsum(acc);
  for (; i < n; ++i) out += std::abs(h[i] + r[i] - t[i]);
  return out;
}

template <typename T>
T l2sq_translation(const T* h, const T* r, const T* t, std::size_t n) {
  using L = Lanes<T>;
  constexpr std::size_t W = L::width;
  auto acc = L::zero();
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    auto d = L::sub(L::add(L::load(h + i), L::load(r + i)), L::load(t + i));
    acc = L::fmadd(d, d, acc);
  }
  T out = L::hsum(acc);
  for (; i < n; ++i) {
    const T d = h[i] + r[i] - t[i];
    out += d * d;
  }
  return out;
}

template <typename T>
T trilinear(const T* h, const T* r, const T* t, std::size_t n) {
  using L = Lanes<T>;
  constexpr std::size_t W = L::width;
  auto acc = L::zero();
  std::size_t i = 0;
  for (; i + W <= n; i += W) acc = L::fmadd(L::mul(L::load(h + i), L::load(r + i)), L::load(t + i), acc);
  T out = L::hsum(acc);
  for (; i < n; ++i) out += h[i] * r[i] * t[i];
  return out;
}

template <typename T>
void adam(T* p, const T* g, T* m, T* v, std::size_t n, const AdamCoeffs<T>& c) {
  using L = Lanes<T>;
  constexpr std::size_t W = L::width;
  const auto b1 = L::set1(c.beta1), b2 = L::set1(c.beta2);
  const auto ob1 = L::set1(T{1} - c.beta1), ob2 = L::set1(T{1} - c.beta2);
  const auto bias1 = L::set1(c.bias1), bias2 = L::set1(c.bias2);
  const auto lr = L::set1(c.lr), eps = L::set1(c.eps);
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    const auto gi = L::load(g + i);
    const auto mi = L::add(L::mul(b1, L::load(m + i)), L::mul(ob1, gi));
    const auto vi = L::add(L::mul(b2, L::load(v + i)), L::mul(L::mul(ob2, gi), gi));
    L::store(m + i, mi);
    L::store(v + i, vi);
    const auto step = L::div(L::mul(lr, L::mul(mi, bias1)), L::add(L::sqrt(L::mul(vi, bias2)), eps));
    L::store(p + i, L::sub(L::load(p + i), step));
  }
  const T one_b1 = T{1} - c.beta1;
  const T one_b2 = T{1} - c.beta2;
  for (; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_b1 * g[i];
    v[i] = c.beta2 * v[i] + one_b2 * g[i] * g[i];
    p[i] -= c.lr * (m[i] * c.bias1) / (std::sqrt(v[i] * c.bias2) + c.eps);
  }
}

template <typename T>
Table<T> make() {
  return Table<T>{&dot<T>,          &axpy<T>,           &gemv<T>,      &gemv_t_acc<T>, &ger_acc<T>,
                  &l1_translation<T>, &l2sq_translation<T>, &trilinear<T>, &adam<T>};
}

}  // namespace

template <>
const Table<float>& avx2_table<float>() {
  static const Table<float> t = make<float>();
  return t;
}

template <>
const Table<double>& avx2_table<double>() {
  static const Table<double> t = make<double>();
  return t;
}

}  // namespace relsim::kernels::detail
