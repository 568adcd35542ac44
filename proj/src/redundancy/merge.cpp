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
#include <numeric>

#include "relsim/error.hpp"
#include "relsim/redundancy.hpp"

namespace relsim::redundancy {

namespace {

struct DisjointSets {
  std::vector<std::uint32_t> parent;

  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

RelationPair make_pair_sorted(RelationId a, RelationId b) { return a < b ? RelationPair{a, b} : RelationPair{b, a}; }

MergeResult merge_relations(const similarity::SimilarityMatrix& sim, double lambda) {
  require(lambda > 0.0, Errc::contract, "merge_relations: threshold must be positive");
  const std::size_t n = sim.size();
  MergeResult out;
  out.threshold = lambda;
  DisjointSets sets(n);
  for (RelationId i = 0; i < n; ++i)
    for (RelationId j = i + 1; j < n; ++j)
      if (sim(i, j) >= lambda) {
        out.pairs.emplace_back(i, j);
        sets.unite(i, j);
      }
  out.cluster_of.assign(n, 0);
  std::vector<std::int64_t> index_of_root(n, -1);
  for (RelationId i = 0; i < n; ++i) {
    const auto root = sets.find(i);
    if (index_of_root[root] < 0) {
      index_of_root[root] = static_cast<std::int64_t>(out.clusters.size());
      out.clusters.emplace_back();
    }
    out.cluster_of[i] = static_cast<std::uint32_t>(index_of_root[root]);
    out.clusters[out.cluster_of[i]].push_back(i);
  }
  return out;
}

Prf toy_prf(const MergeResult& result, const kb::SplitGroundTruth& truth) {
  const auto& src = truth.source_of;
  for (const auto& [a, b] : result.pairs)
    require(a < src.size() && b < src.size(), Errc::contract, "toy_prf: ground truth does not cover the pair");
  std::size_t gold = 0;
  std::vector<std::size_t> per_source;
  for (auto s : src) {
    if (s >= per_source.size()) per_source.resize(s + 1, 0);
    ++per_source[s];
  }
  for (auto c : per_source) gold += c * (c - 1) / 2;
  std::size_t hit = 0;
  for (const auto& [a, b] : result.pairs) hit += src[a] == src[b] ? 1 : 0;
  Prf p;
  p.precision = result.pairs.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(result.pairs.size());
  p.recall = gold == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(gold);
  p.f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
  return p;
}

BestThreshold best_toy_threshold(const similarity::SimilarityMatrix& sim, const kb::SplitGroundTruth& truth) {
  require(truth.source_of.size() == sim.size(), Errc::contract,
          "best_toy_threshold: ground truth size differs from the matrix");
  const std::size_t n = sim.size();
  struct Entry {
    double s;
    bool gold;
  };
  std::vector<Entry> entries;
  std::size_t gold = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool g = truth.source_of[i] == truth.source_of[j];
      gold += g ? 1 : 0;
      if (sim(i, j) > 0.0f) entries.push_back({sim(i, j), g});
    }
  // Sweep thresholds from high to low; every distinct value is a candidate.
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.s > b.s; });
  BestThreshold best;
  best.lambda = entries.empty() ? 1.0 : entries.front().s;
  std::size_t predicted = 0, hit = 0;
  for (std::size_t k = 0; k < entries.size();) {
    const double s = entries[k].s;
    while (k < entries.size() && entries[k].s == s) {
      ++predicted;
      hit += entries[k].gold ? 1 : 0;
      ++k;
    }
    Prf p;
    p.precision = static_cast<double>(hit) / static_cast<double>(predicted);
    p.recall = gold == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(gold);
    p.f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    if (p.f1 > best.prf.f1) best = {s, p};
  }
  return best;
}

}  // namespace relsim::redundancy
