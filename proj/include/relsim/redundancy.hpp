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
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relsim/kb_core.hpp"
#include "relsim/similarity.hpp"

namespace relsim::redundancy {

using kb::RelationId;

// Unordered pair, stored with first < second.
using RelationPair = std::pair<RelationId, RelationId>;
RelationPair make_pair_sorted(RelationId a, RelationId b);

struct MergeResult {
  double threshold = 1.0;
  std::vector<RelationPair> pairs;                 // sorted
  std::vector<std::vector<RelationId>> clusters;   // connected components, sorted by first member
  std::vector<std::uint32_t> cluster_of;           // relation id -> index into clusters
};

// All pairs with S >= lambda and their connected components.
MergeResult merge_relations(const similarity::SimilarityMatrix& sim, double lambda);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Pair-level scores against the sub-relation ground truth. Empty prediction
// scores zero precision.
Prf toy_prf(const MergeResult& result, const kb::SplitGroundTruth& truth);

struct BestThreshold {
  double lambda = 1.0;
  Prf prf;
};

// Scans every distinct off-diagonal similarity as a threshold; ties on F1 keep
// the larger threshold.
BestThreshold best_toy_threshold(const similarity::SimilarityMatrix& sim, const kb::SplitGroundTruth& truth);

struct EstimatorSample {
  RelationPair pair{};
  int label = 0;                // f(x) in {0, 1}
  double proposal_weight = 1.0; // unnormalized q~(x)
};

// Self-normalized importance sampling: w_i = [f_i = 1] / q~_i, normalized to
// sum 1, then summed over samples the merger predicts positive.
double estimate_recall(std::span<const EstimatorSample> samples,
                       const std::function<bool(const RelationPair&)>& predicted);

// Fraction of valid labels among pairs drawn uniformly from the predicted set.
double estimate_precision(std::span<const int> labels);

struct AggregationConfig {
  std::size_t panel = 15;
  std::size_t min_valid = 8;
};

// A pair is valid when at least min_valid of the panel voted valid.
int aggregate_label(std::size_t valid_votes, std::size_t votes, const AggregationConfig& cfg = {});

enum class SampleMode { proposal, per_threshold };
SampleMode parse_sample_mode(const std::string& s);

struct AnnotationRow {
  std::string pair_id;  // "q..." drawn from the proposal, "u..." uniform above a threshold
  RelationPair pair{};
  double similarity = 0.0;
  double proposal_weight = 0.0;  // q~ for "q" rows; the sampling threshold for "u" rows
  int label = -1;       // -1 pending
};

struct SampleRequest {
  SampleMode mode = SampleMode::proposal;
  std::size_t n = 500;                // proposal draws (with replacement)
  std::vector<double> thresholds;     // per-threshold mode
  std::size_t per_threshold = 100;    // uniform draws above each threshold (without replacement)
  std::uint64_t seed = 0;
};

std::vector<AnnotationRow> sample_annotation_batch(const similarity::SimilarityMatrix& sim, const SampleRequest& req);

// pair_id,r1_name,r2_name,similarity,proposal_weight,label
std::string annotation_to_csv(const std::vector<AnnotationRow>& rows, const std::vector<std::string>& relation_names);
// Labels may be -1/0/1 or "k/n" vote counts aggregated with `agg`.
std::vector<AnnotationRow> annotation_from_csv(const std::string& text, const similarity::SimilarityMatrix& sim,
                                               const AggregationConfig& agg = {});

struct PrPoint {
  double lambda = 0.0;
  double precision = 0.0;  // NaN when no uniform sample lies above lambda
  double p_lo = 0.0, p_hi = 0.0;
  double recall = 0.0;
  double r_lo = 0.0, r_hi = 0.0;
  std::size_t precision_samples = 0;
};

struct PrCurve {
  std::vector<PrPoint> points;
  std::size_t bootstrap = 0;
};

// Recall from the proposal rows. Precision at lambda from the uniform rows
// with similarity >= lambda whose sampling threshold is <= lambda, so every
// row used was drawn uniformly from a superset of the predicted set.
// 95% percentile-bootstrap intervals.
PrCurve pr_curve(const std::vector<AnnotationRow>& rows, const std::vector<double>& thresholds,
                 std::size_t bootstrap_n, std::uint64_t seed);

// lambda,precision,p_lo,p_hi,recall,r_lo,r_hi
std::string pr_to_csv(const PrCurve& curve);
nlohmann::json pr_to_json(const PrCurve& curve);
PrCurve pr_from_json(const nlohmann::json& j);

}  // namespace relsim::redundancy
