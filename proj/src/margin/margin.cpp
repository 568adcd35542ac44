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
#include <cmath>
#include <numeric>
#include <sstream>

#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/io.hpp"
#include "relsim/kernels.hpp"
#include "relsim/margin.hpp"
#include "relsim/rng.hpp"

namespace relsim::margin {

namespace fs = std::filesystem;

Matrix<double> cost_matrix(const similarity::SimilarityMatrix& sim, double alpha, double temperature) {
  require(alpha >= 0.0, Errc::contract, "cost_matrix: alpha must be non-negative");
  require(temperature > 0.0, Errc::contract, "cost_matrix: temperature must be positive");
  const std::size_t n = sim.size();
  Matrix<double> c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) c(i, j) = alpha * std::pow(static_cast<double>(sim(i, j)), 1.0 / temperature);
  return c;
}

namespace {

LossGrad loss_from_augmented(std::span<const double> logits, std::span<const double> augmented, std::size_t gold) {
  LossGrad out;
  const double lse = kernels::log_sum_exp<double>(augmented);
  out.loss = -logits[gold] + lse;
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(augmented[i] - lse);
  out.grad[gold] -= 1.0;
  return out;
}

}  // namespace

LossGrad softmax_margin_loss(std::span<const double> logits, std::size_t gold, std::span<const double> cost_row) {
  require(gold < logits.size(), Errc::index, "softmax_margin_loss: gold class out of range");
  require(cost_row.size() == logits.size(), Errc::contract, "softmax_margin_loss: cost row size differs");
  require(cost_row[gold] == 0.0, Errc::contract, "softmax_margin_loss: gold cost must be zero");
  std::vector<double> aug(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) aug[i] = logits[i] + cost_row[i];
  return loss_from_augmented(logits, aug, gold);
}

LossGrad cross_entropy_loss(std::span<const double> logits, std::size_t gold) {
  require(gold < logits.size(), Errc::index, "cross_entropy_loss: gold class out of range");
  return loss_from_augmented(logits, logits, gold);
}

double margin_temperature(std::size_t epoch, const MarginSchedule& s) {
  return std::max(s.floor, s.init * std::pow(s.decay, static_cast<double>(epoch)));
}

void ToyConfig::validate() const {
  require(alpha >= 0.0, Errc::config, "margin alpha must be non-negative");
  require(schedule.init > 0.0 && schedule.floor > 0.0 && schedule.decay > 0.0, Errc::config,
          "margin schedule must be positive");
  require(epochs > 0 && batch_size > 0, Errc::config, "margin epochs and batch_size must be positive");
  require(learning_rate > 0.0, Errc::config, "margin learning_rate must be positive");
}

nlohmann::json ToyConfig::to_json() const {
  return {{"loss", loss == LossKind::softmax_margin ? "softmax-margin" : "cross-entropy"},
          {"alpha", alpha},
          {"temperature_init", schedule.init},
          {"temperature_decay", schedule.decay},
          {"temperature_floor", schedule.floor},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"seed", seed}};
}

std::vector<double> ToyClassifier::logits(std::span<const double> features) const {
  std::vector<double> out(weights.rows());
  kernels::active<double>().gemv(weights.data(), weights.rows(), weights.cols(), features.data(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[i];
  return out;
}

std::vector<double> pair_features(const Matrix<float>& entity_emb, kb::EntityId h, kb::EntityId t) {
  require(h < entity_emb.rows() && t < entity_emb.rows(), Errc::index, "pair_features: entity out of range");
  const std::size_t d = entity_emb.cols();
  std::vector<double> f(2 * d);
  for (std::size_t k = 0; k < d; ++k) {
    f[k] = entity_emb(h, k);
    f[d + k] = entity_emb(t, k);
  }
  return f;
}

ToyResult train_toy_classifier(const kb::TripleStore& store, const kb::TripleStore& valid,
                               const similarity::SimilarityMatrix* sim, const Matrix<float>& entity_emb,
                               const ToyConfig& config) {
  config.validate();
  require(!store.empty(), Errc::empty_store, "train_toy_classifier: empty training store");
  if (entity_emb.rows() == 0 || entity_emb.rows() != store.num_entities())
    fail(Errc::config, "train_toy_classifier: embeddings missing or sized for a different vocabulary");
  const std::size_t R = store.num_relations();
  const bool use_cost = config.loss == LossKind::softmax_margin;
  if (use_cost) {
    require(sim != nullptr, Errc::config, "train_toy_classifier: softmax-margin needs a similarity matrix");
    require(sim->size() == R, Errc::config, "train_toy_classifier: similarity matrix size differs from |R|");
  }
  const std::size_t width = 2 * entity_emb.cols();
  ToyResult res;
  res.model.weights = Matrix<double>(R, width);
  res.model.bias.assign(R, 0.0);

  std::vector<std::vector<double>> feats(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) feats[i] = pair_features(entity_emb, store[i].head, store[i].tail);

  std::vector<std::size_t> order(store.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix<double> gw(R, width);
  std::vector<double> gb(R);
  const auto& k = kernels::active<double>();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Matrix<double> cost;
    if (use_cost) cost = cost_matrix(*sim, config.alpha, margin_temperature(epoch, config.schedule));
    Rng rng(derive_seed(config.seed, {0x3a61u, epoch}));
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      gw.fill(0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t b = begin; b < end; ++b) {
        const auto idx = order[b];
        const auto gold = store[idx].relation;
        const auto l = res.model.logits(feats[idx]);
        const LossGrad lg = use_cost ? softmax_margin_loss(l, gold, cost.row(gold)) : cross_entropy_loss(l, gold);
        if (!std::isfinite(lg.loss)) fail(Errc::training, "train_toy_classifier: non-finite loss");
        total += lg.loss;
        k.ger_acc(lg.grad.data(), R, feats[idx].data(), width, gw.data());
        for (std::size_t r = 0; r < R; ++r) gb[r] += lg.grad[r];
      }
      const double step = -config.learning_rate / static_cast<double>(end - begin);
      k.axpy(step, gw.data(), res.model.weights.data(), gw.flat().size());
      k.axpy(step, gb.data(), res.model.bias.data(), R);
    }
    res.report.epoch_loss.push_back(total / static_cast<double>(order.size()));
  }

  auto& rep = res.report;
  rep.confusion = Matrix<std::size_t>(R, R);
  std::size_t correct = 0;
  for (const auto& t : valid.triples()) {
    const auto l = res.model.logits(pair_features(entity_emb, t.head, t.tail));
    const auto pred = static_cast<std::size_t>(std::max_element(l.begin(), l.end()) - l.begin());
    ++rep.confusion(t.relation, pred);
    correct += pred == t.relation ? 1 : 0;
    rep.ranking.entries.push_back(kge::rank_relation(t, l, nullptr));
  }
  rep.accuracy = valid.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(valid.size());
  rep.ranking.finalize();
  return res;
}

Matrix<float> load_entity_features(const fs::path& dir) {
  const auto doc = io::read_json(dir / "manifest.json");
  const auto kind = doc.value("kind", "");
  if (kind == "kge") return kge::load_model(dir).entity_emb;
  if (kind == "factdist") {
    const auto p = factdist::load_checkpoint(dir);
    return p.entity_emb;
  }
  fail(Errc::config, dir.string() + ": expected a kge or factdist checkpoint for features");
}

nlohmann::json toy_report_to_json(const ToyReport& r) {
  return {{"format_version", io::kFormatVersion},
          {"kind", "margin_report"},
          {"accuracy", r.accuracy},
          {"mrr", r.ranking.mrr},
          {"hits1", r.ranking.hits1},
          {"hits3", r.ranking.hits3},
          {"epoch_loss", r.epoch_loss}};
}

std::string confusion_to_csv(const ToyReport& r, const std::vector<std::string>& relation_names) {
  std::ostringstream out;
  out << "gold,predicted,count\n";
  for (std::size_t g = 0; g < r.confusion.rows(); ++g)
    for (std::size_t p = 0; p < r.confusion.cols(); ++p)
      if (r.confusion(g, p) > 0)
        out << io::csv_field(relation_names.at(g)) << ',' << io::csv_field(relation_names.at(p)) << ','
            << r.confusion(g, p) << '\n';
  return out.str();
}

}  // namespace relsim::margin
