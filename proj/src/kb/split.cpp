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
#include <numeric>

#include "relsim/error.hpp"
#include "relsim/kb_core.hpp"
#include "relsim/rng.hpp"

namespace relsim::kb {

ValidationSplit split_validation(const TripleStore& store, double valid_fraction, std::uint64_t seed) {
  require(valid_fraction > 0.0 && valid_fraction < 1.0, Errc::config, "valid fraction must lie in (0, 1)");
  require(!store.empty(), Errc::empty_store, "cannot split an empty store");

  const std::size_t n = store.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(derive_seed(seed, {0x5e1175u}));
  rng.shuffle(order);

  const auto target = static_cast<std::size_t>(std::llround(valid_fraction * static_cast<double>(n)));
  std::vector<char> in_valid(n, 0);
  for (std::size_t k = 0; k < target; ++k) in_valid[order[k]] = 1;

  std::vector<std::size_t> ent(store.num_entities(), 0), rel(store.num_relations(), 0);
  auto add = [&](const Triple& t, int delta) {
    ent[t.head] += delta;
    ent[t.tail] += delta;
    rel[t.relation] += delta;
  };
  for (std::size_t i = 0; i < n; ++i)
    if (!in_valid[i]) add(store[i], +1);

  // Repair: any held-out triple with an element unseen in train goes back.
  // Moving triples into train only adds coverage, so one pass is enough.
  std::size_t valid_count = target;
  for (std::size_t k = 0; k < target; ++k) {
    const auto& t = store[order[k]];
    if (ent[t.head] == 0 || ent[t.tail] == 0 || rel[t.relation] == 0) {
      in_valid[order[k]] = 0;
      add(t, +1);
      --valid_count;
    }
  }
  // Backfill from train with triples whose elements stay covered after removal.
  for (std::size_t k = target; k < n && valid_count < target; ++k) {
    const auto& t = store[order[k]];
    const std::size_t need_e = t.head == t.tail ? 3 : 2;
    const bool ok = rel[t.relation] >= 2 && (t.head == t.tail ? ent[t.head] >= need_e
                                                               : ent[t.head] >= 2 && ent[t.tail] >= 2);
    if (ok) {
      in_valid[order[k]] = 1;
      add(t, -1);
      ++valid_count;
    }
  }

  std::vector<Triple> train, valid;
  for (std::size_t i = 0; i < n; ++i) (in_valid[i] ? valid : train).push_back(store[i]);
  ValidationSplit out{store.with_triples(std::move(train)), store.with_triples(std::move(valid)), target,
                      valid_count < target};
  return out;
}

}  // namespace relsim::kb
