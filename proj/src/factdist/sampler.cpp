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

#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/rng.hpp"

namespace relsim::factdist {

namespace {

std::vector<double> cdf_from_log_probs(std::span<const double> lp) {
  std::vector<double> w(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) w[i] = std::exp(lp[i]);
  return cumulative(w);
}

}  // namespace

template <typename T>
std::vector<std::pair<EntityId, EntityId>> ConditionalCache<T>::sample(RelationId r, std::size_t n,
                                                                        std::uint64_t seed) {
  require(n >= 1, Errc::contract, "sample_pairs: n must be at least 1");
  if (r >= params_.num_relations()) fail(Errc::index, "relation id out of range: " + std::to_string(r));
  auto hit = head_cdf_.find(r);
  if (hit == head_cdf_.end()) hit = head_cdf_.emplace(r, cdf_from_log_probs(head_log_probs(r))).first;
  const auto& head_cdf = hit->second;
  Rng rng(derive_seed(seed, {0x5a3bu, r}));
  std::vector<std::pair<EntityId, EntityId>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = static_cast<EntityId>(sample_cdf(head_cdf, rng));
    const std::uint64_t key = (static_cast<std::uint64_t>(h) << 32) | r;
    auto it = tail_cdf_.find(key);
    if (it == tail_cdf_.end()) it = tail_cdf_.emplace(key, cdf_from_log_probs(tail_log_probs(h, r))).first;
    const auto t = static_cast<EntityId>(sample_cdf(it->second, rng));
    out.emplace_back(h, t);
  }
  return out;
}

template <typename T>
std::vector<std::pair<EntityId, EntityId>> sample_pairs(const Params<T>& p, RelationId r, std::size_t n,
                                                        std::uint64_t seed) {
  ConditionalCache<T> cache(p);
  return cache.sample(r, n, seed);
}

template std::vector<std::pair<EntityId, EntityId>> sample_pairs<float>(const Params<float>&, RelationId, std::size_t,
                                                                        std::uint64_t);
template std::vector<std::pair<EntityId, EntityId>> sample_pairs<double>(const Params<double>&, RelationId,
                                                                         std::size_t, std::uint64_t);
template std::vector<std::pair<EntityId, EntityId>> ConditionalCache<float>::sample(RelationId, std::size_t,
                                                                                    std::uint64_t);
template std::vector<std::pair<EntityId, EntityId>> ConditionalCache<double>::sample(RelationId, std::size_t,
                                                                                     std::uint64_t);

}  // namespace relsim::factdist
