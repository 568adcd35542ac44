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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "relsim/rng.hpp"

namespace relsim::kb {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  auto operator<=>(const Triple&) const = default;
};

// Indexed, duplicate-free set of facts with dense entity/relation ids.
// Immutable once built; safe to share between threads.
class TripleStore {
 public:
  TripleStore() = default;

  // Validates ids against the vocabularies and drops repeated triples
  // (first occurrence wins).
  static TripleStore build(std::vector<std::string> entity_names, std::vector<std::string> relation_names,
                           std::vector<Triple> triples);

  std::size_t num_entities() const noexcept { return entity_names_.size(); }
  std::size_t num_relations() const noexcept { return relation_names_.size(); }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  std::span<const Triple> triples() const noexcept { return triples_; }
  const Triple& operator[](std::size_t i) const { return triples_[i]; }

  const std::vector<std::string>& entity_names() const noexcept { return entity_names_; }
  const std::vector<std::string>& relation_names() const noexcept { return relation_names_; }

  // Indices into triples() for relation r, in triple order.
  std::span<const std::uint32_t> by_relation(RelationId r) const;
  // Relations observed between (head, tail), ascending.
  std::span<const RelationId> relations_between(EntityId head, EntityId tail) const;
  bool contains(const Triple& t) const;

  std::optional<EntityId> find_entity(const std::string& name) const;
  std::optional<RelationId> find_relation(const std::string& name) const;

  // Same vocabularies, different triple set.
  TripleStore with_triples(std::vector<Triple> triples) const;

  // Re-checks every structural invariant; throws Errc::contract on violation.
  void validate() const;

  bool operator==(const TripleStore& o) const {
    return entity_names_ == o.entity_names_ && relation_names_ == o.relation_names_ && triples_ == o.triples_;
  }

 private:
  void index();

  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::vector<Triple> triples_;
  std::vector<std::vector<std::uint32_t>> by_relation_;
  std::unordered_map<std::uint64_t, std::vector<RelationId>> by_pair_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
};

enum class TripleFormat { tsv, reverb_tsv };

struct LoadOptions {
  // ReVerb only: a pattern is kept when it has more than this many distinct
  // triples.
  std::size_t reverb_keep_above = 10;
};

// Reads `head\trel\ttail` (or ReVerb `arg1\tpattern\targ2\tconfidence`) lines.
// Vocabularies are numbered in first-appearance order.
TripleStore load_triples(const std::filesystem::path& path, TripleFormat format, const LoadOptions& opts = {});
TripleFormat parse_format(const std::string& name);

// JSON manifest at `manifest_path` plus a sibling `<stem>.triples.bin`
// (little-endian u32, row-major h,r,t). Returns the files written.
std::vector<std::filesystem::path> save_store(const TripleStore& store, const std::filesystem::path& manifest_path);
TripleStore load_store(const std::filesystem::path& manifest_path);

struct ValidationSplit {
  TripleStore train;
  TripleStore valid;
  std::size_t requested_valid = 0;
  bool shortfall = false;  // valid ended up smaller than requested
};

// Holds out ~valid_fraction of triples such that every entity and relation in
// the valid part also occurs in train. Both parts keep the source vocabularies.
ValidationSplit split_validation(const TripleStore& store, double valid_fraction, std::uint64_t seed);

struct CrpConfig {
  double alpha = 1.0;
  std::size_t min_count = 50;
  std::uint64_t seed = 0;
};

struct SplitGroundTruth {
  // source_of[sub_relation] = relation id in the original store.
  std::vector<RelationId> source_of;
  std::vector<std::string> source_names;
};

struct CrpSplit {
  TripleStore store;
  SplitGroundTruth truth;
};

// Splits every relation into sub-relations by a Chinese restaurant process over
// its triples, then drops sub-relations with fewer than min_count triples.
CrpSplit crp_split(const TripleStore& store, const CrpConfig& config);

// Table index for each of `n` customers seated in order: a new table with
// weight alpha, table k with weight n_k, renormalized over the choices.
std::vector<std::size_t> crp_assign(std::size_t n, double alpha, Rng& rng);

std::vector<std::filesystem::path> save_truth(const SplitGroundTruth& truth, const TripleStore& split_store,
                                              const std::filesystem::path& path);
SplitGroundTruth load_truth(const std::filesystem::path& path, const TripleStore& split_store);

}  // namespace relsim::kb
