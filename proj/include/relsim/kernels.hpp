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

#pragma once

// Dense inner-loop kernels. Each element type has a scalar reference table and,
// on x86-64 hosts with AVX2+FMA, a vectorized table. The active table is chosen
// once at startup from CPUID; RELSIM_SIMD=scalar|avx2 overrides it.

#include <cstddef>
#include <span>
#include <string_view>

namespace relsim::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Switches the table used by the free functions below. Throws if unavailable.
void set_backend(Backend b);

template <typename T>
struct AdamCoeffs {
  T lr;
  T beta1;
  T beta2;
  T eps;
  T bias1;  // 1 / (1 - beta1^t)
  T bias2;  // 1 / (1 - beta2^t)
};

template <typename T>
struct Table {
  T (*dot)(const T* a, const T* b, std::size_t n);
  // y += a * x
  void (*axpy)(T a, const T* x, T* y, std::size_t n);
  // y[i] = dot(M.row(i), x)
  void (*gemv)(const T* m, std::size_t rows, std::size_t cols, const T* x, T* y);
  // y += M^T v
  void (*gemv_t_acc)(const T* m, std::size_t rows, std::size_t cols, const T* v, T* y);
  // M += u v^T
  void (*ger_acc)(const T* u, std::size_t rows, const T* v, std::size_t cols, T* m);
  // sum_i |h_i + r_i - t_i|
  T (*l1_translation)(const T* h, const T* r, const T* t, std::size_t n);
  // sum_i (h_i + r_i - t_i)^2
  T (*l2sq_translation)(const T* h, const T* r, const T* t, std::size_t n);
  // sum_i h_i r_i t_i
  T (*trilinear)(const T* h, const T* r, const T* t, std::size_t n);
  void (*adam)(T* param, const T* grad, T* m, T* v, std::size_t n, const AdamCoeffs<T>& c);
};

template <typename T>
const Table<T>& table(Backend b);

template <typename T>
const Table<T>& active();

template <typename T>
inline T dot(std::span<const T> a, std::span<const T> b) {
  return active<T>().dot(a.data(), b.data(), a.size());
}

template <typename T>
inline void axpy(T a, std::span<const T> x, std::span<T> y) {
  active<T>().axpy(a, x.data(), y.data(), x.size());
}

// Numerically stable log(sum(exp(x))) accumulated in double.
template <typename T>
double log_sum_exp(std::span<const T> x);

// out[i] = x[i] - log_sum_exp(x), in double.
template <typename T>
void log_softmax(std::span<const T> x, std::span<double> out);

}  // namespace relsim::kernels
