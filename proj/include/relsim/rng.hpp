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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace relsim {

// Mixes a base seed with a list of integers (pair ids, epoch, triple index...)
// into an independent stream seed. splitmix64 finalizer per component.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts);

// Portable RNG wrapper. The standard distributions are implementation-defined,
// so every draw used by the library goes through these members instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n);

  // Standard normal (Box-Muller, no cached spare).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Draws an index from unnormalized non-negative weights. Returns weights.size()
// only if every weight is zero.
std::size_t sample_weighted(std::span<const double> weights, Rng& rng);

// Inclusive prefix sums of `weights`, for repeated draws with sample_cdf.
std::vector<double> cumulative(std::span<const double> weights);
std::size_t sample_cdf(std::span<const double> cdf, Rng& rng);

}  // namespace relsim
