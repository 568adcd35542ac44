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
#include <cmath>

#include "relsim/error.hpp"
#include "relsim/kernels.hpp"
#include "relsim/rng.hpp"
#include "relsim/similarity.hpp"

namespace relsim::similarity {

std::uint64_t pair_seed(std::uint64_t seed, RelationId r1, RelationId r2) { return derive_seed(seed, {0x6b6cu, r1, r2}); }

double kl_mc(factdist::ConditionalCache<float>& cache, RelationId r1, RelationId r2, std::size_t n,
             std::uint64_t seed) {
  const auto samples = cache.sample(r1, n, seed);
  double acc = 0.0;
  for (const auto& [h, t] : samples) acc += cache.log_prob(h, t, r1) - cache.log_prob(h, t, r2);
  return acc / static_cast<double>(samples.size());
}

double kl_mc(const factdist::Params<float>& p, RelationId r1, RelationId r2, std::size_t n, std::uint64_t seed) {
  factdist::ConditionalCache<float> cache(p);
  return kl_mc(cache, r1, r2, n, seed);
}

template <typename T>
double kl_exact(const factdist::Params<T>& p, RelationId r1, RelationId r2, std::size_t cap) {
  const std::size_t n = p.num_entities();
  if (n > cap)
    fail(Errc::refused, "kl_exact: " + std::to_string(n) + " entities exceeds the enumeration cap " +
                            std::to_string(cap));
  factdist::ConditionalCache<T> cache(p);
  const auto h1 = cache.head_log_probs(r1);
  const auto h2 = cache.head_log_probs(r2);
  double kl = 0.0;
  for (std::size_t h = 0; h < n; ++h) {
    const auto t1 = cache.tail_log_probs(static_cast<kb::EntityId>(h), r1);
    const auto t2 = cache.tail_log_probs(static_cast<kb::EntityId>(h), r2);
    for (std::size_t t = 0; t < n; ++t) {
      const double lp1 = h1[h] + t1[t];
      const double w = std::exp(lp1);
      if (w == 0.0) continue;
      kl += w * (lp1 - (h2[h] + t2[t]));
    }
  }
  return kl;
}

template double kl_exact<float>(const factdist::Params<float>&, RelationId, RelationId, std::size_t);
template double kl_exact<double>(const factdist::Params<double>&, RelationId, RelationId, std::size_t);

double divergence_to_similarity(double kl_forward, double kl_backward) {
  return std::exp(-std::max(std::max(kl_forward, 0.0), std::max(kl_backward, 0.0)));
}

double similarity(const factdist::Params<float>& p, RelationId r1, RelationId r2, std::size_t n, std::uint64_t seed) {
  factdist::ConditionalCache<float> cache(p);
  return divergence_to_similarity(kl_mc(cache, r1, r2, n, pair_seed(seed, r1, r2)),
                                  kl_mc(cache, r2, r1, n, pair_seed(seed, r2, r1)));
}

}  // namespace relsim::similarity
