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

#include <cmath>
#include <map>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/kge.hpp"

using namespace relsim;
using namespace relsim::factdist;

namespace {

Params<double> hand_params() {
  auto p = zero_params<double>(2, 1, 2, 2);
  p.entity_emb(0, 0) = 1.0;
  p.entity_emb(0, 1) = 0.0;
  p.entity_emb(1, 0) = 0.5;
  p.entity_emb(1, 1) = 1.0;
  p.relation_emb(0, 0) = 1.0;
  p.relation_emb(0, 1) = 2.0;
  p.head_net.w1(0, 0) = p.head_net.w1(1, 1) = 1.0;
  p.head_net.w2(0, 0) = p.head_net.w2(1, 1) = 1.0;
  // Tail hidden units read h[0] and r[1].
  p.tail_net.w1(0, 0) = 1.0;
  p.tail_net.w1(1, 3) = 1.0;
  p.tail_net.w2(0, 0) = p.tail_net.w2(1, 1) = 1.0;
  return p;
}

std::vector<Triple> small_batch() {
  return {{0, 0, 1}, {1, 0, 2}, {2, 1, 3}, {3, 1, 4}, {4, 0, 0}, {0, 1, 2}, {1, 0, 1}};
}

}  // namespace

TEST_CASE("zero networks give zero logits and uniform probabilities") {
  const auto p = zero_params<double>(10, 3, 4, 8);
  for (double v : head_logits(p, 1)) CHECK(v == 0.0);
  for (double v : tail_logits(p, 2, 1)) CHECK(v == 0.0);
  CHECK(head_logits(p, 0).size() == 10);
  CHECK(log_prob(p, 3, 4, 2) == doctest::Approx(std::log(1.0 / 100.0)));
  const std::vector<Triple> batch{{0, 0, 1}, {2, 1, 3}};
  CHECK(nll_loss_and_grads(p, std::span<const Triple>(batch)).loss == doctest::Approx(2.0 * std::log(10.0)));
}

TEST_CASE("hand-set two-dimensional forward pass") {
  const auto p = hand_params();
  const auto hl = head_logits(p, 0);
  CHECK(hl[0] == doctest::Approx(1.0));
  CHECK(hl[1] == doctest::Approx(2.5));
  const auto tl = tail_logits(p, 1, 0);
  CHECK(tl[0] == doctest::Approx(0.5));
  CHECK(tl[1] == doctest::Approx(2.25));
  const double expected = (2.5 - std::log(std::exp(1.0) + std::exp(2.5))) + (0.5 - std::log(std::exp(0.5) + std::exp(2.25)));
  CHECK(log_prob(p, 1, 0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("entities with identical embeddings get identical tail logits") {
  auto p = init_params<double>(6, 2, 4, 8, 3);
  for (std::size_t k = 0; k < 4; ++k) p.entity_emb(5, k) = p.entity_emb(2, k);
  CHECK(tail_logits(p, 2, 1) == tail_logits(p, 5, 1));
}

TEST_CASE("distribution sums to one over all pairs") {
  const auto p = init_params<double>(20, 5, 8, 16, 42);
  for (RelationId r = 0; r < 5; ++r) {
    double total = 0.0;
    for (EntityId h = 0; h < 20; ++h)
      for (EntityId t = 0; t < 20; ++t) total += std::exp(log_prob(p, h, t, r));
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
  const auto pf = init_params<float>(20, 5, 8, 16, 42);
  double total = 0.0;
  for (EntityId h = 0; h < 20; ++h)
    for (EntityId t = 0; t < 20; ++t) total += std::exp(log_prob(pf, h, t, 2));
  CHECK(std::abs(total - 1.0) < 1e-3);
}

TEST_CASE("analytic gradients match central differences") {
  auto p = init_params<double>(5, 2, 3, 4, 17);
  // Non-zero biases so their gradients are exercised away from zero.
  for (std::size_t i = 0; i < p.head_net.b1.size(); ++i) p.head_net.b1[i] = 0.1 * static_cast<double>(i + 1);
  for (std::size_t i = 0; i < p.tail_net.b2.size(); ++i) p.tail_net.b2[i] = -0.05 * static_cast<double>(i);
  const auto batch = small_batch();
  const auto lg = nll_loss_and_grads(p, std::span<const Triple>(batch));
  auto tensors = p.tensors();
  const auto grads = lg.grads.tensors();
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    for (std::size_t i = 0; i < tensors[k].size(); ++i) {
      const double saved = tensors[k][i];
      tensors[k][i] = saved + h;
      const double up = mean_nll(p, std::span<const Triple>(batch));
      tensors[k][i] = saved - h;
      const double down = mean_nll(p, std::span<const Triple>(batch));
      tensors[k][i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[k][i];
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      CAPTURE(kTensorNames[k]);
      CAPTURE(i);
      CHECK(rel < 1e-4);
      worst = std::max(worst, rel);
    }
  }
  MESSAGE("worst relative gradient error " << worst);
}

TEST_CASE("duplicating the batch keeps the mean loss") {
  const auto p = init_params<double>(5, 2, 3, 4, 1);
  auto batch = small_batch();
  const double once = nll_loss_and_grads(p, std::span<const Triple>(batch)).loss;
  auto twice = batch;
  twice.insert(twice.end(), batch.begin(), batch.end());
  CHECK(nll_loss_and_grads(p, std::span<const Triple>(twice)).loss == doctest::Approx(once).epsilon(1e-12));
}

TEST_CASE("adam step") {
  auto p = init_params<double>(3, 1, 2, 2, 5);
  const auto before = p;
  auto state = AdamState<double>::zeros_like(p);
  auto g = zero_params<double>(3, 1, 2, 2);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  adam_step(p, state, g, cfg);
  CHECK(p == before);
  CHECK(state.step_count == 1);

  g.entity_emb(1, 0) = 1.0;
  auto q = before;
  auto st = AdamState<double>::zeros_like(q);
  adam_step(q, st, g, cfg);
  CHECK(q.entity_emb(1, 0) == doctest::Approx(before.entity_emb(1, 0) - 0.1).epsilon(1e-6));
  CHECK(q.entity_emb(0, 0) == before.entity_emb(0, 0));
  adam_step(q, st, g, cfg);
  CHECK(st.step_count == 2);

  auto wrong = zero_params<double>(4, 1, 2, 2);
  CHECK_THROWS_AS(adam_step(q, st, wrong, cfg), Error);
}

TEST_CASE("training lowers the loss and is deterministic") {
  const auto store = testing::random_store(12, 2, 20, 8);
  const kb::TripleStore none = store.with_triples({});
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 8;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.seed = 4;
  const auto a = train(store, none, cfg);
  CHECK(mean_nll(a.params, store.triples()) < a.initial_train_nll);
  const auto b = train(store, none, cfg);
  CHECK(a.params == b.params);
  CHECK(a.train_nll == b.train_nll);
}

TEST_CASE("five memorized triples beat the uniform baseline") {
  const auto store = testing::store_from({{"a", "r", "b"}, {"b", "r", "c"}, {"c", "r", "d"}, {"d", "r", "e"}, {"e", "r", "a"}});
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.learning_rate = 0.02;
  cfg.batch_size = 5;
  cfg.max_epochs = 300;
  cfg.patience = 300;
  const auto res = train(store, store.with_triples({}), cfg);
  for (const auto& t : store.triples()) CHECK(std::exp(log_prob(res.params, t.head, t.tail, t.relation)) > 1.0 / 25.0);
}

TEST_CASE("sampling") {
  SUBCASE("near point mass") {
    auto p = zero_params<float>(6, 1, 2, 2);
    p.entity_emb(3, 0) = 1.0f;
    p.head_net.b2[0] = 50.0f;  // query (50, 0): entity 3 dominates the head softmax
    p.entity_emb(4, 1) = 1.0f;
    p.tail_net.b2[1] = 50.0f;  // tail query (0, 50): entity 4 dominates
    for (const auto& [h, t] : sample_pairs(p, 0, 200, 9)) {
      CHECK(h == 3u);
      CHECK(t == 4u);
    }
  }
  SUBCASE("uniform heads") {
    const auto p = zero_params<float>(4, 1, 2, 2);
    const std::size_t n = 100000;
    std::vector<std::size_t> count(4, 0);
    for (const auto& [h, t] : sample_pairs(p, 0, n, 3)) ++count[h];
    for (auto c : count) CHECK(std::abs(static_cast<double>(c) / n - 0.25) < 0.01);
  }
  SUBCASE("frequencies converge to the model") {
    const auto p = init_params<float>(10, 2, 4, 8, 21);
    const std::size_t n = 100000;
    std::map<std::pair<EntityId, EntityId>, std::size_t> count;
    for (const auto& pr : sample_pairs(p, 1, n, 5)) ++count[pr];
    double l1 = 0.0;
    for (EntityId h = 0; h < 10; ++h)
      for (EntityId t = 0; t < 10; ++t) {
        const double emp = static_cast<double>(count[{h, t}]) / n;
        l1 += std::abs(emp - std::exp(log_prob(p, h, t, 1)));
      }
    CHECK(l1 < 0.05);
  }
  SUBCASE("determinism and n = 0") {
    const auto p = init_params<float>(10, 2, 4, 8, 21);
    CHECK(sample_pairs(p, 0, 50, 1) == sample_pairs(p, 0, 50, 1));
    CHECK_THROWS_AS(sample_pairs(p, 0, 0, 1), Error);
  }
}

TEST_CASE("checkpoint round-trip and pretrained initialization") {
  const auto dir = testing::scratch_dir("factdist_ckpt");
  const auto store = testing::random_store(15, 3, 60, 2);
  const auto p = init_params<float>(15, 3, 6, 12, 7);
  CheckpointInfo info{TrainConfig{}, store.entity_names(), store.relation_names()};
  info.config.embedding_dim = 6;
  info.config.hidden_dim = 12;
  save_checkpoint(dir / "ckpt", p, info);
  CheckpointInfo back;
  CHECK(load_checkpoint(dir / "ckpt", &back) == p);
  CHECK(back.relation_names == store.relation_names());
  for (auto name : kTensorNames) CHECK(std::filesystem::exists(dir / "ckpt" / (std::string(name) + ".bin")));

  kge::KgeConfig kc;
  kc.dim = 6;
  kc.epochs = 2;
  kge::NegativeSampler neg;
  neg.store = &store;
  const auto km = kge::train_kge(store, store.with_triples({}), kc, neg).model;
  kge::save_model(dir / "transe", km, store);
  TrainConfig cfg;
  cfg.embedding_dim = 6;
  cfg.max_epochs = 1;
  cfg.learning_rate = 1e-12;
  cfg.pretrained_init = dir / "transe";
  const auto res = train(store, store.with_triples({}), cfg);
  for (std::size_t i = 0; i < km.entity_emb.flat().size(); ++i)
    CHECK(res.params.entity_emb.flat()[i] == doctest::Approx(km.entity_emb.flat()[i]).epsilon(1e-6));
  cfg.embedding_dim = 7;
  CHECK_THROWS_AS(train(store, store.with_triples({}), cfg), Error);
}
