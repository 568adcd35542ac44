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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "relsim/error.hpp"
#include "tables.hpp"

namespace relsim::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(RELSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("RELSIM_SIMD")) {
    const std::string want = env;
    if (want == "scalar") return Backend::scalar;
    if (want == "avx2" && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) { return b == Backend::scalar || cpu_has_avx2(); }

Backend active_backend() { return current().load(); }

void set_backend(Backend b) {
  require(backend_available(b), Errc::config, "kernel backend not available: " + std::string(backend_name(b)));
  current().store(b);
}

template <typename T>
const Table<T>& table(Backend b) {
#ifdef RELSIM_HAVE_AVX2
  if (b == Backend::avx2) {
    require(cpu_has_avx2(), Errc::config, "avx2 kernels not supported on this CPU");
    return detail::avx2_table<T>();
  }
#else
  require(b == Backend::scalar, Errc::config, "avx2 kernels not built");
#endif
  return detail::scalar_table<T>();
}

template <typename T>
const Table<T>& active() {
  return table<T>(current().load());
}

template const Table<float>& table<float>(Backend);
template const Table<double>& table<double>(Backend);
template const Table<float>& active<float>();
template const Table<double>& active<double>();

template <typename T>
double log_sum_exp(std::span<const T> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  double mx = static_cast<double>(*std::max_element(x.begin(), x.end()));
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (T v : x) s += std::exp(static_cast<double>(v) - mx);
  return mx + std::log(s);
}

template <typename T>
void log_softmax(std::span<const T> x, std::span<double> out) {
  const double lse = log_sum_exp(x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(x[i]) - lse;
}

template double log_sum_exp<float>(std::span<const float>);
template double log_sum_exp<double>(std::span<const double>);
template void log_softmax<float>(std::span<const float>, std::span<double>);
template void log_softmax<double>(std::span<const double>, std::span<double>);

}  // namespace relsim::kernels
