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
#include <map>

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/kb_core.hpp"

namespace relsim::kb {

std::vector<std::size_t> crp_assign(std::size_t n, double alpha, Rng& rng) {
  std::vector<std::size_t> table_of(n);
  std::vector<double> weights;  // existing table sizes, then the new-table weight
  for (std::size_t i = 0; i < n; ++i) {
    weights.push_back(alpha);
    const std::size_t k = sample_weighted(weights, rng);
    weights.pop_back();
    if (k == weights.size()) weights.push_back(1.0);
    else weights[k] += 1.0;
    table_of[i] = k;
  }
  return table_of;
}

CrpSplit crp_split(const TripleStore& store, const CrpConfig& config) {
  require(config.alpha > 0.0, Errc::config, "CRP alpha must be positive");
  require(config.min_count >= 1, Errc::config, "CRP min_count must be at least 1");
  require(!store.empty(), Errc::empty_store, "cannot split an empty store");

  std::vector<std::string> names;
  SplitGroundTruth truth;
  truth.source_names = store.relation_names();
  std::vector<Triple> triples;

  for (RelationId r = 0; r < store.num_relations(); ++r) {
    std::vector<std::uint32_t> members(store.by_relation(r).begin(), store.by_relation(r).end());
    if (members.empty()) continue;
    Rng rng(derive_seed(config.seed, {r}));
    rng.shuffle(members);
    const auto table_of = crp_assign(members.size(), config.alpha, rng);

    std::map<std::size_t, std::vector<std::uint32_t>> tables;
    for (std::size_t i = 0; i < members.size(); ++i) tables[table_of[i]].push_back(members[i]);
    for (auto& [k, idx] : tables) {
      if (idx.size() < config.min_count) continue;
      const auto sub = static_cast<RelationId>(names.size());
      names.push_back(store.relation_names()[r] + "#" + std::to_string(k));
      truth.source_of.push_back(r);
      std::sort(idx.begin(), idx.end());
      for (auto i : idx) triples.push_back({store[i].head, sub, store[i].tail});
    }
  }
  return {TripleStore::build(store.entity_names(), std::move(names), std::move(triples)), std::move(truth)};
}

std::vector<std::filesystem::path> save_truth(const SplitGroundTruth& truth, const TripleStore& split_store,
                                              const std::filesystem::path& path) {
  io::json mapping = io::json::array();
  for (std::size_t s = 0; s < truth.source_of.size(); ++s) {
    mapping.push_back({{"sub_relation", split_store.relation_names().at(s)},
                       {"source", truth.source_names.at(truth.source_of[s])}});
  }
  io::write_json(path, {{"format_version", io::kFormatVersion},
                        {"kind", "split_ground_truth"},
                        {"source_relations", truth.source_names},
                        {"mapping", mapping}});
  return {path};
}

SplitGroundTruth load_truth(const std::filesystem::path& path, const TripleStore& split_store) {
  const auto doc = io::read_json(path);
  io::check_format_version(doc, path.string());
  SplitGroundTruth truth;
  truth.source_names = doc.at("source_relations").get<std::vector<std::string>>();
  std::unordered_map<std::string, RelationId> src;
  for (RelationId i = 0; i < truth.source_names.size(); ++i) src.emplace(truth.source_names[i], i);
  truth.source_of.assign(split_store.num_relations(), 0);
  std::vector<char> seen(split_store.num_relations(), 0);
  for (const auto& m : doc.at("mapping")) {
    const auto sub = split_store.find_relation(m.at("sub_relation").get<std::string>());
    auto it = src.find(m.at("source").get<std::string>());
    if (!sub || it == src.end()) fail(Errc::input, path.string() + ": mapping names an unknown relation");
    truth.source_of[*sub] = it->second;
    seen[*sub] = 1;
  }
  for (std::size_t s = 0; s < seen.size(); ++s)
    if (!seen[s]) fail(Errc::input, path.string() + ": no source for " + split_store.relation_names()[s]);
  return truth;
}

}  // namespace relsim::kb
