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
#include <span>
#include <vector>

#include "json.hpp"
#include "relsim/kb_core.hpp"
#include "relsim/kge.hpp"
#include "relsim/matrix.hpp"
#include "relsim/similarity.hpp"

namespace relsim::margin {

// values(i, j) = alpha * S(i, j)^(1/temperature) off the diagonal, 0 on it.
Matrix<double> cost_matrix(const similarity::SimilarityMatrix& sim, double alpha, double temperature = 1.0);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits
};

// -logits[gold] + log_sum_exp(logits + cost_row); cost_row[gold] must be 0.
LossGrad softmax_margin_loss(std::span<const double> logits, std::size_t gold, std::span<const double> cost_row);
LossGrad cross_entropy_loss(std::span<const double> logits, std::size_t gold);

struct MarginSchedule {
  double init = 64.0;
  double decay = 0.8;
  double floor = 16.0;
};

// max(floor, init * decay^epoch)
double margin_temperature(std::size_t epoch, const MarginSchedule& s = {});

enum class LossKind { softmax_margin, cross_entropy };

struct ToyConfig {
  LossKind loss = LossKind::softmax_margin;
  double alpha = 9.0;
  MarginSchedule schedule;
  std::size_t epochs = 30;
  double learning_rate = 0.5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct ToyClassifier {
  Matrix<double> weights;  // |R| x 2d
  std::vector<double> bias;

  std::vector<double> logits(std::span<const double> features) const;
  bool operator==(const ToyClassifier&) const = default;
};

// Frozen [E_h; E_t] features.
std::vector<double> pair_features(const Matrix<float>& entity_emb, kb::EntityId h, kb::EntityId t);

struct ToyReport {
  double accuracy = 0.0;
  Matrix<std::size_t> confusion;  // gold x predicted
  kge::RankingReport ranking;     // unfiltered rank of the gold class among logits
  std::vector<double> epoch_loss; // mean training loss per epoch
};

struct ToyResult {
  ToyClassifier model;
  ToyReport report;
};

// sim may be null only for the cross-entropy loss.
ToyResult train_toy_classifier(const kb::TripleStore& store, const kb::TripleStore& valid,
                               const similarity::SimilarityMatrix* sim, const Matrix<float>& entity_emb,
                               const ToyConfig& config);

// Entity table of a KGE or fact-distribution checkpoint directory.
Matrix<float> load_entity_features(const std::filesystem::path& dir);

nlohmann::json toy_report_to_json(const ToyReport& r);
// gold,predicted,count over relation names
std::string confusion_to_csv(const ToyReport& r, const std::vector<std::string>& relation_names);

}  // namespace relsim::margin
