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
#include <fstream>
#include <set>
#include <string>
#include <tuple>

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/kb_core.hpp"

namespace relsim::kb {

namespace {

std::uint64_t pair_key(EntityId h, EntityId t) { return (static_cast<std::uint64_t>(h) << 32) | t; }

}  // namespace

TripleStore TripleStore::build(std::vector<std::string> entity_names, std::vector<std::string> relation_names,
                               std::vector<Triple> triples) {
  TripleStore s;
  s.entity_names_ = std::move(entity_names);
  s.relation_names_ = std::move(relation_names);
  for (const auto& t : triples) {
    if (t.head >= s.entity_names_.size() || t.tail >= s.entity_names_.size())
      fail(Errc::index, "triple references entity id outside vocabulary");
    if (t.relation >= s.relation_names_.size()) fail(Errc::index, "triple references relation id outside vocabulary");
  }
  std::set<Triple> seen;
  s.triples_.reserve(triples.size());
  for (const auto& t : triples) {
    if (seen.insert(t).second) s.triples_.push_back(t);
  }
  s.index();
  return s;
}

void TripleStore::index() {
  by_relation_.assign(relation_names_.size(), {});
  by_pair_.clear();
  for (std::uint32_t i = 0; i < triples_.size(); ++i) {
    const auto& t = triples_[i];
    by_relation_[t.relation].push_back(i);
    auto& rels = by_pair_[pair_key(t.head, t.tail)];
    rels.insert(std::lower_bound(rels.begin(), rels.end(), t.relation), t.relation);
  }
  entity_index_.clear();
  relation_index_.clear();
  for (EntityId i = 0; i < entity_names_.size(); ++i) entity_index_.emplace(entity_names_[i], i);
  for (RelationId i = 0; i < relation_names_.size(); ++i) relation_index_.emplace(relation_names_[i], i);
}

std::span<const std::uint32_t> TripleStore::by_relation(RelationId r) const {
  require(r < by_relation_.size(), Errc::index, "relation id out of range: " + std::to_string(r));
  return by_relation_[r];
}

std::span<const RelationId> TripleStore::relations_between(EntityId head, EntityId tail) const {
  auto it = by_pair_.find(pair_key(head, tail));
  if (it == by_pair_.end()) return {};
  return it->second;
}

bool TripleStore::contains(const Triple& t) const {
  auto rels = relations_between(t.head, t.tail);
  return std::binary_search(rels.begin(), rels.end(), t.relation);
}

std::optional<EntityId> TripleStore::find_entity(const std::string& name) const {
  auto it = entity_index_.find(name);
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> TripleStore::find_relation(const std::string& name) const {
  auto it = relation_index_.find(name);
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

TripleStore TripleStore::with_triples(std::vector<Triple> triples) const {
  return build(entity_names_, relation_names_, std::move(triples));
}

void TripleStore::validate() const {
  std::set<Triple> seen;
  std::size_t indexed = 0;
  for (const auto& t : triples_) {
    require(t.head < entity_names_.size() && t.tail < entity_names_.size() && t.relation < relation_names_.size(),
            Errc::contract, "triple id without a name entry");
    require(seen.insert(t).second, Errc::contract, "duplicate triple in store");
  }
  require(by_relation_.size() == relation_names_.size(), Errc::contract, "by_relation size mismatch");
  for (RelationId r = 0; r < by_relation_.size(); ++r) {
    for (auto i : by_relation_[r]) require(triples_[i].relation == r, Errc::contract, "by_relation inconsistent");
    indexed += by_relation_[r].size();
  }
  require(indexed == triples_.size(), Errc::contract, "by_relation does not cover every triple");
  std::size_t pair_entries = 0;
  for (const auto& [key, rels] : by_pair_) {
    pair_entries += rels.size();
    for (auto r : rels) {
      Triple t{static_cast<EntityId>(key >> 32), r, static_cast<EntityId>(key & 0xffffffffu)};
      require(seen.count(t) == 1, Errc::contract, "by_pair references a missing triple");
    }
  }
  require(pair_entries == triples_.size(), Errc::contract, "by_pair does not cover every triple");
}

TripleFormat parse_format(const std::string& name) {
  if (name == "tsv") return TripleFormat::tsv;
  if (name == "reverb-tsv" || name == "reverb") return TripleFormat::reverb_tsv;
  fail(Errc::config, "unknown triple format: " + name);
}

TripleStore load_triples(const std::filesystem::path& path, TripleFormat format, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_artifact, "cannot open triple file: " + path.string());

  struct Row {
    std::string h, r, t;
  };
  std::vector<Row> rows;
  const std::size_t min_fields = format == TripleFormat::tsv ? 3 : 4;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = io::split_tabs(line);
    if (fields.size() < min_fields)
      fail(Errc::parse, path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(min_fields) +
                            " tab-separated fields, found " + std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      fail(Errc::parse, path.string() + ":" + std::to_string(lineno) + ": empty head, relation or tail");
    if (format == TripleFormat::reverb_tsv) {
      try {
        std::size_t used = 0;
        (void)std::stod(fields[3], &used);
        if (used != fields[3].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail(Errc::parse, path.string() + ":" + std::to_string(lineno) + ": confidence is not a number");
      }
    }
    rows.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  if (rows.empty()) fail(Errc::empty_store, "no triples in " + path.string());

  if (format == TripleFormat::reverb_tsv) {
    std::set<std::tuple<std::string, std::string, std::string>> distinct;
    std::unordered_map<std::string, std::size_t> count;
    for (const auto& row : rows) {
      if (distinct.emplace(row.h, row.r, row.t).second) ++count[row.r];
    }
    std::erase_if(rows, [&](const Row& row) { return count[row.r] <= opts.reverb_keep_above; });
    if (rows.empty()) fail(Errc::empty_store, "no ReVerb pattern survives the frequency filter in " + path.string());
  }

  std::vector<std::string> entities, relations;
  std::unordered_map<std::string, EntityId> eidx;
  std::unordered_map<std::string, RelationId> ridx;
  auto entity = [&](const std::string& name) {
    auto [it, fresh] = eidx.emplace(name, static_cast<EntityId>(entities.size()));
    if (fresh) entities.push_back(name);
    return it->second;
  };
  std::vector<Triple> triples;
  triples.reserve(rows.size());
  for (const auto& row : rows) {
    const EntityId h = entity(row.h);
    auto [rit, fresh] = ridx.emplace(row.r, static_cast<RelationId>(relations.size()));
    if (fresh) relations.push_back(row.r);
    const EntityId t = entity(row.t);
    triples.push_back({h, rit->second, t});
  }
  return TripleStore::build(std::move(entities), std::move(relations), std::move(triples));
}

std::vector<std::filesystem::path> save_store(const TripleStore& store, const std::filesystem::path& manifest_path) {
  namespace fs = std::filesystem;
  const fs::path bin = manifest_path.parent_path() / (manifest_path.stem().string() + ".triples.bin");
  if (manifest_path.has_parent_path()) fs::create_directories(manifest_path.parent_path());
  std::vector<std::uint32_t> flat;
  flat.reserve(store.size() * 3);
  std::vector<std::size_t> counts(store.num_relations(), 0);
  for (const auto& t : store.triples()) {
    flat.push_back(t.head);
    flat.push_back(t.relation);
    flat.push_back(t.tail);
    ++counts[t.relation];
  }
  io::write_u32(bin, flat);
  io::json doc{{"format_version", io::kFormatVersion},
               {"kind", "triple_store"},
               {"num_entities", store.num_entities()},
               {"num_relations", store.num_relations()},
               {"num_triples", store.size()},
               {"relation_counts", counts},
               {"entity_names", store.entity_names()},
               {"relation_names", store.relation_names()},
               {"triples_file", bin.filename().string()}};
  io::write_json(manifest_path, doc);
  return {manifest_path, bin};
}

TripleStore load_store(const std::filesystem::path& manifest_path) {
  const auto doc = io::read_json(manifest_path);
  io::check_format_version(doc, manifest_path.string());
  if (doc.value("kind", "") != "triple_store") fail(Errc::parse, manifest_path.string() + ": not a triple store");
  try {
    auto entities = doc.at("entity_names").get<std::vector<std::string>>();
    auto relations = doc.at("relation_names").get<std::vector<std::string>>();
    const std::size_t n = doc.at("num_triples").get<std::size_t>();
    const auto flat = io::read_u32(manifest_path.parent_path() / doc.at("triples_file").get<std::string>(), 3 * n);
    std::vector<Triple> triples(n);
    for (std::size_t i = 0; i < n; ++i) triples[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
    auto store = TripleStore::build(std::move(entities), std::move(relations), std::move(triples));
    if (store.size() != n) fail(Errc::parse, manifest_path.string() + ": duplicate triples in blob");
    return store;
  } catch (const io::json::exception& e) {
    fail(Errc::parse, manifest_path.string() + ": " + e.what());
  }
}

}  // namespace relsim::kb
