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

#include "fixtures.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "relsim/rng.hpp"

namespace relsim::testing {

namespace fs = std::filesystem;

kb::TripleStore store_from(const std::vector<NamedTriple>& rows) {
  std::vector<std::string> ents, rels;
  auto id = [](std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    if (it != v.end()) return static_cast<std::uint32_t>(it - v.begin());
    v.push_back(s);
    return static_cast<std::uint32_t>(v.size() - 1);
  };
  std::vector<kb::Triple> triples;
  for (const auto& [h, r, t] : rows) {
    const auto hi = id(ents, h);
    const auto ri = id(rels, r);
    const auto ti = id(ents, t);
    triples.push_back({hi, ri, ti});
  }
  return kb::TripleStore::build(ents, rels, triples);
}

kb::TripleStore random_store(std::size_t entities, std::size_t relations, std::size_t triples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::set<kb::Triple> seen;
  while (seen.size() < triples) {
    seen.insert({static_cast<std::uint32_t>(gen() % entities), static_cast<std::uint32_t>(gen() % relations),
                 static_cast<std::uint32_t>(gen() % entities)});
  }
  std::vector<std::string> ents, rels;
  for (std::size_t i = 0; i < entities; ++i) ents.push_back("e" + std::to_string(i));
  for (std::size_t i = 0; i < relations; ++i) rels.push_back("r" + std::to_string(i));
  return kb::TripleStore::build(ents, rels, {seen.begin(), seen.end()});
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("relsim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

similarity::SimilarityMatrix matrix_of(const std::vector<std::vector<double>>& values, std::string method) {
  similarity::SimilarityMatrix m;
  const std::size_t n = values.size();
  m.values = Matrix<float>(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.values(i, j) = static_cast<float>(values[i][j]);
  for (std::size_t i = 0; i < n; ++i) m.relation_names.push_back("r" + std::to_string(i));
  m.method = std::move(method);
  return m;
}

TypedKb typed_kb(const TypedKbSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t E = spec.types * spec.entities_per_type;
  std::vector<std::string> ents, rels;
  for (std::size_t i = 0; i < E; ++i) ents.push_back("t" + std::to_string(i / spec.entities_per_type) + "_e" +
                                                     std::to_string(i % spec.entities_per_type));
  TypedKb out;
  std::set<kb::Triple> triples;
  std::uint32_t rid = 0;
  for (std::size_t g = 0; g < spec.groups; ++g) {
    const std::size_t ht = g % spec.types;
    const std::size_t tt = spec.self_typed_groups && g % 2 == 1 ? ht : (g + 1 + g / spec.types) % spec.types;
    for (std::size_t k = 0; k < spec.relations_per_group; ++k, ++rid) {
      rels.push_back("/g" + std::to_string(g) + "/r" + std::to_string(k));
      out.group_of.push_back(static_cast<std::uint32_t>(g));
      // Heads: a relation-specific half of the head block; tails: a window
      // that slides with k.
      std::set<kb::Triple> mine;
      std::size_t guard = 0;
      while (mine.size() < spec.triples_per_relation && guard++ < 100 * spec.triples_per_relation) {
        const std::size_t hi = (k * spec.entities_per_type / (2 * spec.relations_per_group) +
                                rng.below(spec.entities_per_type / 2)) % spec.entities_per_type;
        const std::size_t ti = (hi + k * spec.shift + rng.below(spec.window)) % spec.entities_per_type;
        const kb::Triple t{static_cast<std::uint32_t>(ht * spec.entities_per_type + hi), rid,
                           static_cast<std::uint32_t>(tt * spec.entities_per_type + ti)};
        if (t.head == t.tail) continue;
        mine.insert(t);
      }
      triples.insert(mine.begin(), mine.end());
    }
  }
  out.store = kb::TripleStore::build(ents, rels, {triples.begin(), triples.end()});
  return out;
}

}  // namespace relsim::testing
