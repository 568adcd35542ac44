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

// Locally normalized fact distribution P(h, t | r) = P(h | r) P(t | h, r).
// Each factor is a softmax over the whole entity vocabulary of logits
// <MLP(query), entity embedding>: the head network reads the relation
// embedding, the tail network reads [head embedding; relation embedding].

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "relsim/kb_core.hpp"
#include "relsim/matrix.hpp"

namespace relsim::factdist {

using kb::EntityId;
using kb::RelationId;
using kb::Triple;

// One hidden rectified layer: out = W2 relu(W1 x + b1) + b2.
template <typename T>
struct Mlp {
  Matrix<T> w1;  // hidden x in
  std::vector<T> b1;
  Matrix<T> w2;  // out x hidden
  std::vector<T> b2;

  std::size_t in_dim() const { return w1.cols(); }
  std::size_t hidden_dim() const { return w1.rows(); }
  std::size_t out_dim() const { return w2.rows(); }
};

inline constexpr std::array<std::string_view, 10> kTensorNames = {
    "entity_emb", "relation_emb", "head_w1", "head_b1", "head_w2",
    "head_b2",    "tail_w1",      "tail_b1", "tail_w2", "tail_b2"};

template <typename T>
struct Params {
  Matrix<T> entity_emb;    // |E| x d
  Matrix<T> relation_emb;  // |R| x d
  Mlp<T> head_net;         // d -> hidden -> d
  Mlp<T> tail_net;         // 2d -> hidden -> d

  std::size_t num_entities() const { return entity_emb.rows(); }
  std::size_t num_relations() const { return relation_emb.rows(); }
  std::size_t dim() const { return entity_emb.cols(); }
  std::size_t hidden_dim() const { return head_net.hidden_dim(); }

  // Tensor views in kTensorNames order.
  std::array<std::span<T>, 10> tensors();
  std::array<std::span<const T>, 10> tensors() const;

  // Shape and finiteness checks; throws Errc::contract.
  void validate() const;

  template <typename U>
  Params<U> cast() const;

  bool operator==(const Params&) const;
};

// All-zero parameters of the given shape.
template <typename T>
Params<T> zero_params(std::size_t entities, std::size_t relations, std::size_t dim, std::size_t hidden);

// Unit-norm random embeddings, Glorot-uniform weights, zero biases.
template <typename T>
Params<T> init_params(std::size_t entities, std::size_t relations, std::size_t dim, std::size_t hidden,
                      std::uint64_t seed);

// Unnormalized head scores for every entity given r.
template <typename T>
std::vector<T> head_logits(const Params<T>& p, RelationId r);

// Unnormalized tail scores for every entity given (h, r).
template <typename T>
std::vector<T> tail_logits(const Params<T>& p, EntityId h, RelationId r);

// log P(h | r) + log P(t | h, r).
template <typename T>
double log_prob(const Params<T>& p, EntityId h, EntityId t, RelationId r);

template <typename T>
struct LossAndGrads {
  double loss = 0.0;
  Params<T> grads;
};

// Mean negative log-likelihood over `batch` with analytic gradients for
// every tensor.
template <typename T>
LossAndGrads<T> nll_loss_and_grads(const Params<T>& p, std::span<const Triple> batch);

template <typename T>
double mean_nll(const Params<T>& p, std::span<const Triple> triples);

struct TrainConfig {
  std::size_t embedding_dim = 64;
  std::size_t hidden_dim = 0;  // 0 means 2 * embedding_dim
  double learning_rate = 1e-3;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> pretrained_init;

  std::size_t effective_hidden() const { return hidden_dim == 0 ? 2 * embedding_dim : hidden_dim; }
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

template <typename T>
struct AdamState {
  std::array<std::vector<T>, 10> first_moment;
  std::array<std::vector<T>, 10> second_moment;
  std::uint64_t step_count = 0;

  static AdamState zeros_like(const Params<T>& p);
};

template <typename T>
void adam_step(Params<T>& params, AdamState<T>& state, const Params<T>& grads, const TrainConfig& config);

struct TrainResult {
  Params<float> params;  // best-validation parameters
  double initial_train_nll = 0.0;
  std::vector<double> train_nll;  // per epoch
  std::vector<double> valid_nll;  // per epoch
  std::size_t best_epoch = 0;
};

// Mini-batch Adam on the training NLL with early stopping on validation NLL.
TrainResult train(const kb::TripleStore& store, const kb::TripleStore& valid, const TrainConfig& config);

// Sequential sampling: h ~ P(. | r), then t ~ P(. | h, r).
template <typename T>
std::vector<std::pair<EntityId, EntityId>> sample_pairs(const Params<T>& p, RelationId r, std::size_t n,
                                                        std::uint64_t seed);

// Memoized conditionals for repeated evaluation against fixed parameters.
// Not thread-safe; use one per worker.
template <typename T>
class ConditionalCache {
 public:
  explicit ConditionalCache(const Params<T>& params) : params_(params) {}

  std::span<const double> head_log_probs(RelationId r);
  std::span<const double> tail_log_probs(EntityId h, RelationId r);
  double log_prob(EntityId h, EntityId t, RelationId r) { return head_log_probs(r)[h] + tail_log_probs(h, r)[t]; }

  // Same draws as sample_pairs(params, r, n, seed).
  std::vector<std::pair<EntityId, EntityId>> sample(RelationId r, std::size_t n, std::uint64_t seed);

  const Params<T>& params() const { return params_; }

 private:
  const Params<T>& params_;
  std::unordered_map<std::uint64_t, std::vector<double>> head_;
  std::unordered_map<std::uint64_t, std::vector<double>> tail_;
  std::unordered_map<std::uint64_t, std::vector<double>> head_cdf_;
  std::unordered_map<std::uint64_t, std::vector<double>> tail_cdf_;
};

struct CheckpointInfo {
  TrainConfig config;
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
};

// Directory with manifest.json and one f32 blob per tensor.
void save_checkpoint(const std::filesystem::path& dir, const Params<float>& params, const CheckpointInfo& info);
Params<float> load_checkpoint(const std::filesystem::path& dir, CheckpointInfo* info = nullptr);

}  // namespace relsim::factdist
