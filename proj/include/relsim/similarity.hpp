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
#include <vector>

#include "relsim/factdist.hpp"
#include "relsim/matrix.hpp"

namespace relsim::similarity {

using kb::RelationId;

// Pairwise relation similarity. For the fact-distribution method values lie in
// (0, 1] with a unit diagonal; baseline methods keep their native range.
struct SimilarityMatrix {
  Matrix<float> values;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  std::string source;            // checkpoint identifier
  std::string method = "factdist";
  std::vector<std::string> relation_names;

  std::size_t size() const { return values.rows(); }
  float operator()(std::size_t i, std::size_t j) const { return values(i, j); }
  std::optional<RelationId> find(const std::string& name) const;

  // Symmetry always; (0, 1] and unit diagonal for the factdist method.
  void validate() const;
};

inline constexpr std::size_t kDefaultSamples = 1024;
inline constexpr std::size_t kDefaultExactCap = 500;

// Seed for the sample list of ordered pair (r1, r2).
std::uint64_t pair_seed(std::uint64_t seed, RelationId r1, RelationId r2);

// Monte-Carlo KL(P(.|r1) || P(.|r2)) from n sequential samples of P(.|r1).
// Can be negative for small n.
double kl_mc(const factdist::Params<float>& p, RelationId r1, RelationId r2, std::size_t n, std::uint64_t seed);
double kl_mc(factdist::ConditionalCache<float>& cache, RelationId r1, RelationId r2, std::size_t n,
             std::uint64_t seed);

// Exact KL by enumerating all |E|^2 pairs. Refuses when |E| > cap.
template <typename T>
double kl_exact(const factdist::Params<T>& p, RelationId r1, RelationId r2, std::size_t cap = kDefaultExactCap);

// exp(-max(x, y)) with negative inputs clamped to zero.
double divergence_to_similarity(double kl_forward, double kl_backward);

// Symmetric similarity; each direction uses pair_seed(seed, ., .).
double similarity(const factdist::Params<float>& p, RelationId r1, RelationId r2, std::size_t n, std::uint64_t seed);

SimilarityMatrix similarity_matrix(const factdist::Params<float>& p, std::size_t n, std::uint64_t seed,
                                   std::vector<std::string> relation_names = {}, std::string source = {});

enum class BaselineKind { transe, distmult, rescal, rotate };
BaselineKind parse_baseline_kind(const std::string& name);
std::string baseline_kind_name(BaselineKind kind);

struct BaselineEmbeddings {
  BaselineKind kind = BaselineKind::transe;
  std::size_t dim = 0;     // vector length, matrix side for rescal, phase count for rotate
  Matrix<float> payload;   // one row per relation; dim*dim columns for rescal
  std::vector<std::string> relation_names;

  void validate() const;
};

double baseline_similarity(const BaselineEmbeddings& emb, RelationId r1, RelationId r2);
SimilarityMatrix baseline_matrix(const BaselineEmbeddings& emb, std::string source = {});

// Reads either a baseline directory (manifest kind "baseline") or a TransE /
// DistMult checkpoint (manifest kind "kge").
BaselineEmbeddings load_baseline(const std::filesystem::path& dir);
void save_baseline(const std::filesystem::path& dir, const BaselineEmbeddings& emb);

// manifest.json + values.bin (f32, row-major).
std::vector<std::filesystem::path> save_matrix(const std::filesystem::path& dir, const SimilarityMatrix& m);
SimilarityMatrix load_matrix(const std::filesystem::path& dir);

// `r1_name,r2_name,score` over the upper triangle including the diagonal.
std::string matrix_to_csv(const SimilarityMatrix& m);
SimilarityMatrix matrix_from_csv(const std::string& text);

}  // namespace relsim::similarity
