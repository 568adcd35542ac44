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

#include "relsim/error.hpp"
#include "relsim/kernels.hpp"
#include "relsim/kge.hpp"

namespace relsim::kge {

namespace {

// Dense gradient buffers with a touched-row list, so a batch only pays for
// the rows it used.
struct RowGrads {
  Matrix<double> g;
  std::vector<char> mark;
  std::vector<std::uint32_t> touched;

  RowGrads(std::size_t rows, std::size_t cols) : g(rows, cols), mark(rows, 0) {}

  std::span<double> at(std::uint32_t i) {
    if (!mark[i]) {
      mark[i] = 1;
      touched.push_back(i);
    }
    return g.row(i);
  }

  void apply(Matrix<float>& param, double lr) {
    for (auto i : touched) {
      auto p = param.row(i);
      auto d = g.row(i);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = static_cast<float>(p[k] - lr * d[k]);
    }
  }

  void clear() {
    for (auto i : touched) {
      std::fill(g.row(i).begin(), g.row(i).end(), 0.0);
      mark[i] = 0;
    }
    touched.clear();
  }
};

void normalize_row(std::span<float> row) {
  double n2 = 0.0;
  for (float x : row) n2 += static_cast<double>(x) * x;
  if (n2 <= 0.0) return;
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : row) x = static_cast<float>(x * inv);
}

// Adds sign * d(score)/d(params) for triple t into the buffers.
void accumulate_score_grad(const KgeModel& m, const Triple& t, double sign, RowGrads& ge, RowGrads& gr) {
  const std::size_t d = m.entity_emb.cols();
  auto h = m.entity_emb.row(t.head);
  auto r = m.relation_emb.row(t.relation);
  auto tl = m.entity_emb.row(t.tail);
  if (m.kind == ModelKind::distmult) {
    auto gh = ge.at(t.head);
    for (std::size_t k = 0; k < d; ++k) gh[k] += sign * r[k] * tl[k];
    auto gt = ge.at(t.tail);
    for (std::size_t k = 0; k < d; ++k) gt[k] += sign * h[k] * r[k];
    auto grr = gr.at(t.relation);
    for (std::size_t k = 0; k < d; ++k) grr[k] += sign * h[k] * tl[k];
    return;
  }
  // score = -||x||, x = h + r - t; d(score)/dh = -u, d/dr = -u, d/dt = +u.
  std::vector<double> u(d);
  for (std::size_t k = 0; k < d; ++k) u[k] = static_cast<double>(h[k]) + r[k] - tl[k];
  if (m.config.distance == Distance::l1) {
    for (auto& x : u) x = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  } else {
    double n2 = 0.0;
    for (double x : u) n2 += x * x;
    const double n = std::sqrt(n2);
    for (auto& x : u) x = n > 0.0 ? x / n : 0.0;
  }
  auto gh = ge.at(t.head);
  for (std::size_t k = 0; k < d; ++k) gh[k] -= sign * u[k];
  auto gt = ge.at(t.tail);
  for (std::size_t k = 0; k < d; ++k) gt[k] += sign * u[k];
  auto grr = gr.at(t.relation);
  for (std::size_t k = 0; k < d; ++k) grr[k] -= sign * u[k];
}

}  // namespace

KgeTrainResult train_kge(const kb::TripleStore& store, const kb::TripleStore& valid, const KgeConfig& config,
                         const NegativeSampler& neg) {
  config.validate();
  require(!store.empty(), Errc::empty_store, "train_kge: empty training store");
  require(valid.empty() || (valid.num_entities() == store.num_entities() &&
                            valid.num_relations() == store.num_relations()),
          Errc::contract, "train_kge: validation vocabulary differs from training vocabulary");
  require(neg.store != nullptr, Errc::contract, "train_kge: negative sampler has no store");
  require(neg.store->num_entities() == store.num_entities() && neg.store->num_relations() == store.num_relations(),
          Errc::contract, "train_kge: sampler vocabulary differs from training vocabulary");
  if (neg.similarity) {
    neg.similarity->validate();
    require(neg.similarity->similarity.size() == store.num_relations(), Errc::contract,
            "train_kge: similarity matrix size differs from relation count");
  }
  if (neg.typed) neg.typed->validate(store.num_relations());

  KgeTrainResult result{init_model(store.num_entities(), store.num_relations(), config), {}};
  KgeModel& m = result.model;
  const std::size_t d = config.dim;
  RowGrads ge(store.num_entities(), d), gr(store.num_relations(), d);

  std::vector<std::size_t> order(store.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(config.seed, {0x4b47u, epoch}));
    shuffle_rng.shuffle(order);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t idx = order[b];
        const Triple& pos = store[idx];
        Rng rng(derive_seed(config.seed, {0x6e67u, epoch, idx}));
        const Triple negt = neg.draw(pos, epoch, rng);
        const double loss = margin_hinge(kge_score(m, pos.head, pos.relation, pos.tail),
                                         kge_score(m, negt.head, negt.relation, negt.tail), config.margin);
        if (!std::isfinite(loss)) fail(Errc::training, "train_kge: non-finite loss at epoch " + std::to_string(epoch));
        total += loss;
        if (loss <= 0.0) continue;
        accumulate_score_grad(m, pos, -1.0, ge, gr);
        accumulate_score_grad(m, negt, 1.0, ge, gr);
      }
      ge.apply(m.entity_emb, config.learning_rate);
      gr.apply(m.relation_emb, config.learning_rate);
      if (m.kind == ModelKind::transe)
        for (auto i : ge.touched) normalize_row(m.entity_emb.row(i));
      ge.clear();
      gr.clear();
    }
    result.epoch_loss.push_back(total / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace relsim::kge
