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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relsim/kge.hpp"
#include "relsim/matrix.hpp"
#include "relsim/similarity.hpp"

namespace relsim::analysis {

// Ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks. Constant input -> degenerate_input.
double spearman(std::span<const double> x, std::span<const double> y);

// Two-sided: (1 + #{|rho_perm| >= |rho_obs|}) / (1 + shuffles).
double permutation_pvalue(std::span<const double> x, std::span<const double> y, std::size_t shuffles,
                          std::uint64_t seed);

struct AnnotationTable {
  std::vector<std::pair<std::string, std::string>> pairs;  // relation names
  Matrix<int> scores;                                      // pairs x subjects, 0..4

  std::size_t subjects() const { return scores.cols(); }
  std::vector<double> mean_scores() const;
  void validate() const;
};

// r1_name,r2_name,s1,...,sN
AnnotationTable annotation_table_from_csv(const std::string& text);
std::string annotation_table_to_csv(const AnnotationTable& t);

struct LooAgreement {
  double mean = 0.0;
  double std = 0.0;                   // population standard deviation
  std::vector<double> per_subject;    // NaN for skipped subjects
  std::vector<std::size_t> skipped;   // constant columns
};

// Spearman of each subject against the mean of the others.
LooAgreement loo_agreement(const AnnotationTable& t);

// Model score for every annotated pair, looked up by name in either order.
std::vector<double> model_scores(const AnnotationTable& t, const similarity::SimilarityMatrix& sim);

// Spearman between mean human score and model similarity per pair.
double model_human_correlation(const AnnotationTable& t, const similarity::SimilarityMatrix& sim);

struct RankHistogram {
  std::vector<std::size_t> counts;  // counts[k] = distractors with similarity rank k + 1
  std::size_t test_triples = 0;

  std::size_t total() const;
  // Sum of counts over ranks [first, first + width).
  std::size_t window(std::size_t first, std::size_t width) const;
};

// Similarity rank of `other` among all relations except `gold`, sorted by
// S(gold, .) descending; ties take the worst rank of their group.
std::size_t similarity_rank(const similarity::SimilarityMatrix& sim, kb::RelationId gold, kb::RelationId other);

RankHistogram distracting_rank_histogram(const kge::RankingReport& report, const similarity::SimilarityMatrix& sim);

// rank,count for ranks 1..|R|-1
std::string histogram_to_csv(const RankHistogram& h);
nlohmann::json histogram_to_json(const RankHistogram& h);
RankHistogram histogram_from_json(const nlohmann::json& j);

}  // namespace relsim::analysis
