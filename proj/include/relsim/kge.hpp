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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "relsim/kb_core.hpp"
#include "relsim/matrix.hpp"
#include "relsim/rng.hpp"
#include "relsim/similarity.hpp"

namespace relsim::kge {

using kb::EntityId;
using kb::RelationId;
using kb::Triple;

enum class ModelKind { transe, distmult };
enum class Distance { l1, l2 };
enum class NegativeMode { uniform, similarity, typed_mixture, typed_weight };

ModelKind parse_model(const std::string& s);
Distance parse_distance(const std::string& s);
NegativeMode parse_negative_mode(const std::string& s);
std::string model_name(ModelKind k);
std::string negative_mode_name(NegativeMode m);

struct KgeConfig {
  ModelKind model = ModelKind::transe;
  std::size_t dim = 50;
  double margin = 1.0;
  Distance distance = Distance::l1;
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  NegativeMode negative_mode = NegativeMode::uniform;
  // Redraw corruptions that are known facts (bounded number of attempts).
  bool filter_negatives = true;

  void validate() const;
  nlohmann::json to_json() const;
  static KgeConfig from_json(const nlohmann::json& j);
};

struct KgeModel {
  ModelKind kind = ModelKind::transe;
  Matrix<float> entity_emb;
  Matrix<float> relation_emb;
  KgeConfig config;

  std::size_t num_entities() const { return entity_emb.rows(); }
  std::size_t num_relations() const { return relation_emb.rows(); }
  bool operator==(const KgeModel& o) const {
    return kind == o.kind && entity_emb == o.entity_emb && relation_emb == o.relation_emb;
  }
};

KgeModel init_model(std::size_t entities, std::size_t relations, const KgeConfig& config);

// Higher is more plausible: -||h + r - t|| for TransE, sum(h * r * t) for DistMult.
double kge_score(const KgeModel& m, EntityId h, RelationId r, EntityId t);

// Scores of (h, r', t) for every r'.
std::vector<double> relation_scores(const KgeModel& m, EntityId h, EntityId t);

// [margin - pos + neg]_+ with scores (higher = better).
double margin_hinge(double pos_score, double neg_score, double margin);

struct NegSamplerConfig {
  similarity::SimilarityMatrix similarity;
  double temperature_init = 8192.0;
  std::size_t halve_every = 200;
  double temperature_floor = 16.0;

  void validate() const;
};

// max(floor, init * 0.5^floor(epoch / halve_every)).
double temperature_schedule(std::size_t epoch, const NegSamplerConfig& cfg);

struct TypedSamplerConfig {
  std::vector<std::uint32_t> type_of;  // relation id -> type id
  // Mixture variant: alpha = mix_alpha * mix_decay^floor(epoch / mix_every).
  double mix_alpha = 1.0;
  double mix_decay = 0.95;
  std::size_t mix_every = 50;
  // Weight variant: eps = weight_eps + weight_increase * floor(epoch / weight_every).
  double weight_eps = 0.0;
  double weight_increase = 0.5;
  std::size_t weight_every = 50;

  void validate(std::size_t num_relations) const;
  double alpha_at(std::size_t epoch) const;
  double eps_at(std::size_t epoch) const;
};

// Type = first '/'-delimited component of each relation name.
std::vector<std::uint32_t> types_from_prefix(const std::vector<std::string>& relation_names);
// `relation\ttype` lines; every relation must be listed.
std::vector<std::uint32_t> load_type_file(const std::filesystem::path& path,
                                          const std::vector<std::string>& relation_names);

enum class TypedVariant { mixture, weight };

// Corrupts one of {h, r, t}, position and replacement uniform, replacement
// always different from the original. With `known` set, redraws triples that
// are present in it.
Triple uniform_negative(const Triple& t, const kb::TripleStore& store, Rng& rng,
                        const kb::TripleStore* known = nullptr);

// P(r' | r) proportional to S(r, r')^(1/temperature) over r' != r.
std::vector<double> similarity_distribution(RelationId r, const similarity::SimilarityMatrix& sim,
                                            double temperature);
Triple similarity_negative(const Triple& t, const similarity::SimilarityMatrix& sim, double temperature, Rng& rng);

// Distribution over replacement relations (zero for disallowed ones).
std::vector<double> typed_distribution(const Triple& t, const kb::TripleStore& store, const TypedSamplerConfig& cfg,
                                       TypedVariant variant, std::size_t epoch);
Triple typed_negative(const Triple& t, const kb::TripleStore& store, const TypedSamplerConfig& cfg,
                      TypedVariant variant, std::size_t epoch, Rng& rng);

// The negative source handed to train_kge. For non-uniform modes the position
// is still drawn uniformly from {h, r, t}; relation corruption uses the mode's
// distribution.
struct NegativeSampler {
  NegativeMode mode = NegativeMode::uniform;
  const kb::TripleStore* store = nullptr;  // vocabulary + known facts
  std::optional<NegSamplerConfig> similarity;
  std::optional<TypedSamplerConfig> typed;
  bool filter_known = true;

  Triple draw(const Triple& t, std::size_t epoch, Rng& rng) const;
};

struct KgeTrainResult {
  KgeModel model;
  std::vector<double> epoch_loss;  // mean hinge per positive
};

KgeTrainResult train_kge(const kb::TripleStore& store, const kb::TripleStore& valid, const KgeConfig& config,
                         const NegativeSampler& neg);

struct TripleRank {
  Triple triple;
  std::size_t rank = 1;
  std::vector<RelationId> distracting;  // surviving candidates ranked above gold
};

struct RankingReport {
  std::vector<TripleRank> entries;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;

  void finalize();  // recomputes aggregates from entries
};

// Ranks the gold relation among scores; candidates r' != gold with (h, r', t)
// in `known` are removed. Ties count against the gold relation.
TripleRank rank_relation(const Triple& gold, std::span<const double> scores, const kb::TripleStore* known);

RankingReport filtered_relation_ranking(const KgeModel& m, const kb::TripleStore& known, const kb::TripleStore& test);

void save_model(const std::filesystem::path& dir, const KgeModel& m, const kb::TripleStore& vocab);
KgeModel load_model(const std::filesystem::path& dir);

nlohmann::json report_to_json(const RankingReport& r, const std::vector<std::string>& entity_names,
                              const std::vector<std::string>& relation_names);
RankingReport report_from_json(const nlohmann::json& j);
// `h,r,t,rank` with names.
std::string report_to_csv(const RankingReport& r, const std::vector<std::string>& entity_names,
                          const std::vector<std::string>& relation_names);

}  // namespace relsim::kge
