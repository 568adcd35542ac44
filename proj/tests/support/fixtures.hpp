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

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "relsim/kb_core.hpp"
#include "relsim/similarity.hpp"

namespace relsim::testing {

using NamedTriple = std::tuple<std::string, std::string, std::string>;

kb::TripleStore store_from(const std::vector<NamedTriple>& rows);

// Uniformly random distinct triples.
kb::TripleStore random_store(std::size_t entities, std::size_t relations, std::size_t triples, std::uint64_t seed);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

similarity::SimilarityMatrix matrix_of(const std::vector<std::vector<double>>& values,
                                       std::string method = "factdist");

// Entities come in typed blocks; relations come in groups that share a
// (head type, tail type) signature. Within a group every relation draws its
// tails from its own window of the tail block, and neighbouring relations'
// windows overlap, so relations of a group are confusable but distinct.
struct TypedKbSpec {
  std::size_t types = 6;
  std::size_t entities_per_type = 30;
  std::size_t groups = 5;
  std::size_t relations_per_group = 4;
  std::size_t triples_per_relation = 100;
  std::size_t window = 8;    // tails available to one relation
  std::size_t shift = 4;     // window offset between neighbouring relations
  bool self_typed_groups = true;  // some groups map a type onto itself
};

struct TypedKb {
  kb::TripleStore store;
  std::vector<std::uint32_t> group_of;  // relation id -> group
};

TypedKb typed_kb(const TypedKbSpec& spec, std::uint64_t seed);

}  // namespace relsim::testing
