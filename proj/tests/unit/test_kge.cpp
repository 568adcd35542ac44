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
#include <fstream>
#include <numeric>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "relsim/error.hpp"
#include "relsim/kge.hpp"

using namespace relsim;
using namespace relsim::kge;

namespace {

KgeModel blank_model(ModelKind kind, std::size_t E, std::size_t R, std::size_t d) {
  KgeModel m;
  m.kind = kind;
  m.config.model = kind;
  m.config.dim = d;
  m.entity_emb = Matrix<float>(E, d);
  m.relation_emb = Matrix<float>(R, d);
  return m;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return tv / 2;
}

// Two types with three and two relations.
kb::TripleStore typed_store() {
  return testing::store_from({{"x", "/a/p", "y"},
                              {"x", "/a/q", "z"},
                              {"z", "/a/s", "y"},
                              {"y", "/b/u", "x"},
                              {"z", "/b/v", "x"},
                              {"y", "/b/v", "z"}});
}

}  // namespace

TEST_CASE("scores") {
  SUBCASE("transe reaches zero when t = h + r") {
    auto m = blank_model(ModelKind::transe, 2, 1, 3);
    for (std::size_t k = 0; k < 3; ++k) {
      m.entity_emb(0, k) = 0.1f * static_cast<float>(k);
      m.relation_emb(0, k) = 0.5f;
      m.entity_emb(1, k) = m.entity_emb(0, k) + 0.5f;
    }
    CHECK(kge_score(m, 0, 0, 1) == 0.0);
    CHECK(kge_score(m, 1, 0, 0) < 0.0);
  }
  SUBCASE("hand-set two-dimensional vectors") {
    auto m = blank_model(ModelKind::transe, 2, 1, 2);
    m.entity_emb(0, 0) = 1;
    m.entity_emb(0, 1) = 2;
    m.relation_emb(0, 0) = 0.5;
    m.relation_emb(0, 1) = -1;
    m.entity_emb(1, 0) = -1;
    m.entity_emb(1, 1) = 3;
    // h + r - t = (2.5, -2)
    CHECK(kge_score(m, 0, 0, 1) == doctest::Approx(-4.5));
    m.config.distance = Distance::l2;
    CHECK(kge_score(m, 0, 0, 1) == doctest::Approx(-std::sqrt(6.25 + 4.0)));
  }
  SUBCASE("distmult with unit relation is a dot product") {
    auto m = blank_model(ModelKind::distmult, 2, 1, 3);
    const float h[] = {1, -2, 0.5f}, t[] = {3, 1, 4};
    for (std::size_t k = 0; k < 3; ++k) {
      m.entity_emb(0, k) = h[k];
      m.entity_emb(1, k) = t[k];
      m.relation_emb(0, k) = 1;
    }
    CHECK(kge_score(m, 0, 0, 1) == doctest::Approx(3.0));
  }
  SUBCASE("bad ids") {
    auto m = blank_model(ModelKind::transe, 2, 1, 2);
    CHECK_THROWS_AS(kge_score(m, 2, 0, 0), Error);
    CHECK_THROWS_AS(kge_score(m, 0, 1, 0), Error);
  }
}

TEST_CASE("hinge") {
  CHECK(margin_hinge(-1.0, -1.0, 0.0) == 0.0);
  CHECK(margin_hinge(-1.0, -3.0, 1.0) == 0.0);
  CHECK(margin_hinge(-1.0, -0.5, 1.0) == doctest::Approx(1.5));
}

TEST_CASE("training") {
  const auto store = testing::random_store(8, 3, 10, 12);
  const auto none = store.with_triples({});
  KgeConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 100;
  cfg.batch_size = 4;
  cfg.seed = 3;
  NegativeSampler neg;
  neg.store = &store;
  SUBCASE("transe loss decreases and norms stay at one") {
    const auto res = train_kge(store, none, cfg, neg);
    REQUIRE(res.epoch_loss.size() == 100);
    CHECK(res.epoch_loss.back() < res.epoch_loss.front());
    for (std::size_t e = 0; e < store.num_entities(); ++e) {
      double n2 = 0.0;
      for (float v : res.model.entity_emb.row(e)) n2 += static_cast<double>(v) * v;
      CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-5));
    }
    CHECK(train_kge(store, none, cfg, neg).model == res.model);
  }
  SUBCASE("distmult loss decreases") {
    cfg.model = ModelKind::distmult;
    const auto res = train_kge(store, none, cfg, neg);
    CHECK(res.epoch_loss.back() < res.epoch_loss.front());
  }
  SUBCASE("empty store") {
    CHECK_THROWS_AS(train_kge(none, none, cfg, neg), Error);
  }
  SUBCASE("invalid margin") {
    cfg.margin = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}

TEST_CASE("uniform negatives") {
  const auto store = testing::random_store(20, 5, 40, 1);
  Rng rng(5);
  std::array<std::size_t, 3> slot{};
  const std::size_t n = 100000;
  const Triple t{3, 2, 7};
  for (std::size_t i = 0; i < n; ++i) {
    const Triple c = uniform_negative(t, store, rng);
    const int diff = (c.head != t.head) + (c.relation != t.relation) + (c.tail != t.tail);
    REQUIRE(diff == 1);
    slot[c.head != t.head ? 0 : c.relation != t.relation ? 1 : 2]++;
  }
  const double sd = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  for (auto c : slot) CHECK(std::abs(static_cast<double>(c) - n / 3.0) < 3 * sd);

  SUBCASE("single relation never corrupts the relation") {
    const auto one = testing::random_store(10, 1, 20, 2);
    for (int i = 0; i < 1000; ++i) {
      const Triple c = uniform_negative(one[0], one, rng);
      CHECK(c.relation == 0u);
      CHECK(c != one[0]);
    }
  }
  SUBCASE("known triples are avoided") {
    for (const auto& p : store.triples())
      for (int i = 0; i < 20; ++i) CHECK_FALSE(store.contains(uniform_negative(p, store, rng, &store)));
  }
}

TEST_CASE("similarity negatives") {
  SUBCASE("hand normalization") {
    const auto sim = testing::matrix_of({{1, 0.9, 0.1}, {0.9, 1, 0.5}, {0.1, 0.5, 1}});
    const auto p = similarity_distribution(0, sim, 1.0);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == doctest::Approx(0.9));
    CHECK(p[2] == doctest::Approx(0.1));
  }
  SUBCASE("equal similarities and very high temperature are uniform") {
    const auto flat = testing::matrix_of({{1, 0.3, 0.3, 0.3}, {0.3, 1, 0.3, 0.3}, {0.3, 0.3, 1, 0.3}, {0.3, 0.3, 0.3, 1}});
    const std::vector<double> uni{0, 1.0 / 3, 1.0 / 3, 1.0 / 3};
    CHECK(total_variation(similarity_distribution(0, flat, 1.0), uni) < 1e-12);
    const auto sharp = testing::matrix_of({{1, 0.99, 0.01, 1e-6}, {0.99, 1, 0.3, 0.3}, {0.01, 0.3, 1, 0.3}, {1e-6, 0.3, 0.3, 1}});
    CHECK(total_variation(similarity_distribution(0, sharp, 1e9), uni) < 1e-6);
    const auto p = similarity_distribution(0, sharp, 16.0);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
    CHECK(p[1] > p[2]);
  }
  SUBCASE("never returns the original relation") {
    const auto sim = testing::matrix_of({{1, 0.9, 0.1}, {0.9, 1, 0.5}, {0.1, 0.5, 1}});
    Rng rng(2);
    std::array<std::size_t, 3> count{};
    for (int i = 0; i < 20000; ++i) {
      const Triple c = similarity_negative({0, 0, 1}, sim, 1.0, rng);
      REQUIRE(c.relation != 0u);
      CHECK(c.head == 0u);
      ++count[c.relation];
    }
    CHECK(static_cast<double>(count[1]) / 20000 == doctest::Approx(0.9).epsilon(0.02));
  }
  SUBCASE("bad temperature") {
    const auto sim = testing::matrix_of({{1, 0.5}, {0.5, 1}});
    CHECK_THROWS_AS(similarity_distribution(0, sim, 0.0), Error);
  }
}

TEST_CASE("temperature schedule") {
  NegSamplerConfig cfg;
  CHECK(temperature_schedule(0, cfg) == 8192.0);
  CHECK(temperature_schedule(199, cfg) == 8192.0);
  CHECK(temperature_schedule(200, cfg) == 4096.0);
  CHECK(temperature_schedule(1000000, cfg) == 16.0);
  double prev = temperature_schedule(0, cfg);
  for (std::size_t e = 1; e < 5000; e += 7) {
    const double t = temperature_schedule(e, cfg);
    CHECK(t <= prev);
    CHECK(t >= cfg.temperature_floor);
    prev = t;
  }
  cfg.temperature_floor = 10000.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("typed negatives") {
  const auto store = typed_store();
  TypedSamplerConfig cfg;
  cfg.type_of = types_from_prefix(store.relation_names());
  CHECK(cfg.type_of == std::vector<std::uint32_t>{0, 0, 0, 1, 1});
  const Triple t{0, 0, 1};  // (x, /a/p, y): nothing else links x to y

  SUBCASE("mixture at alpha one is uniform over the others") {
    cfg.mix_alpha = 1.0;
    const auto p = typed_distribution(t, store, cfg, TypedVariant::mixture, 0);
    for (std::size_t r = 1; r < 5; ++r) CHECK(p[r] == doctest::Approx(0.25));
    CHECK(p[0] == 0.0);
  }
  SUBCASE("mixture at alpha zero keeps the type") {
    cfg.mix_alpha = 0.5;
    cfg.mix_decay = 0.0;
    cfg.mix_every = 1;
    CHECK(cfg.alpha_at(3) == 0.0);
    const auto p = typed_distribution(t, store, cfg, TypedVariant::mixture, 3);
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.5));
    CHECK(p[3] == 0.0);
  }
  SUBCASE("weight variant") {
    const auto p0 = typed_distribution(t, store, cfg, TypedVariant::weight, 0);
    for (std::size_t r = 1; r < 5; ++r) CHECK(p0[r] == doctest::Approx(0.25));
    cfg.weight_eps = 1.0;
    const auto p1 = typed_distribution(t, store, cfg, TypedVariant::weight, 0);
    CHECK(p1[1] + p1[2] == doctest::Approx(2.0 / 3));
    CHECK(p1[3] == doctest::Approx(1.0 / 6));
    CHECK(cfg.eps_at(100) == doctest::Approx(2.0));
  }
  SUBCASE("relations already linking the pair are excluded") {
    const auto p = typed_distribution({1, 3, 0}, store, cfg, TypedVariant::weight, 0);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
      const Triple c = typed_negative(t, store, cfg, TypedVariant::mixture, 0, rng);
      CHECK(c.relation != 0u);
      CHECK_FALSE(store.contains(c));
    }
  }
  SUBCASE("type file must cover every relation") {
    const auto dir = testing::scratch_dir("kge_types");
    {
      std::ofstream(dir / "types.tsv") << "/a/p\tA\n/a/q\tA\n/a/s\tA\n/b/u\tB\n";
    }
    CHECK_THROWS_AS(load_type_file(dir / "types.tsv", store.relation_names()), Error);
    { std::ofstream(dir / "types.tsv", std::ios::app) << "/b/v\tB\n"; }
    CHECK(load_type_file(dir / "types.tsv", store.relation_names()) == cfg.type_of);
  }
}

TEST_CASE("sampler distributions sum to one") {
  const auto store = testing::random_store(6, 8, 60, 9);
  TypedSamplerConfig cfg;
  cfg.type_of = {0, 0, 1, 1, 1, 2, 2, 0};
  cfg.mix_alpha = 0.7;
  cfg.weight_eps = 0.4;
  auto sim = testing::matrix_of(std::vector<std::vector<double>>(8, std::vector<double>(8, 0.5)));
  for (std::size_t i = 0; i < 8; ++i) sim.values(i, i) = 1.0f;
  for (const auto& t : store.triples()) {
    for (auto v : {TypedVariant::mixture, TypedVariant::weight}) {
      const auto p = typed_distribution(t, store, cfg, v, 0);
      CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
      CHECK(p[t.relation] == 0.0);
    }
    const auto q = similarity_distribution(t.relation, sim, 3.0);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("relation ranking") {
  SUBCASE("hand-set scores") {
    const std::vector<double> s{0.5, 0.9, 0.1, 0.9, 0.3};
    auto r = rank_relation({0, 0, 1}, s, nullptr);
    CHECK(r.rank == 3);
    CHECK(r.distracting == std::vector<RelationId>{1, 3});
    CHECK(rank_relation({0, 1, 1}, s, nullptr).rank == 2);  // tie counts against gold
    CHECK(rank_relation({0, 2, 1}, s, nullptr).rank == 5);
    CHECK(rank_relation({0, 4, 1}, s, nullptr).distracting == std::vector<RelationId>{1, 3, 0});
  }
  SUBCASE("known competitors are filtered") {
    const auto store = testing::store_from({{"a", "r0", "b"}, {"a", "r1", "b"}});
    const std::vector<double> s{0.1, 0.9};
    CHECK(rank_relation({0, 0, 1}, s, nullptr).rank == 2);
    const auto r = rank_relation({0, 0, 1}, s, &store);
    CHECK(r.rank == 1);
    CHECK(r.distracting.empty());
  }
  SUBCASE("perfect model") {
    const auto store = testing::store_from({{"a", "r0", "b"}, {"b", "r1", "c"}});
    auto m = blank_model(ModelKind::transe, 3, 2, 2);
    // b = a + r0, c = b + r1, r0 and r1 orthogonal
    m.relation_emb(0, 0) = 1;
    m.relation_emb(1, 1) = 1;
    m.entity_emb(1, 0) = 1;
    m.entity_emb(2, 0) = 1;
    m.entity_emb(2, 1) = 1;
    const auto rep = filtered_relation_ranking(m, store, store);
    CHECK(rep.mrr == 1.0);
    CHECK(rep.hits1 == 1.0);
    for (const auto& e : rep.entries) CHECK(e.distracting.empty());
  }
  SUBCASE("aggregates") {
    RankingReport rep;
    rep.entries = {{{}, 1, {}}, {{}, 2, {}}, {{}, 4, {}}};
    rep.finalize();
    CHECK(rep.mrr == doctest::Approx((1 + 0.5 + 0.25) / 3));
    CHECK(rep.hits1 == doctest::Approx(1.0 / 3));
    CHECK(rep.hits3 == doctest::Approx(2.0 / 3));
  }
}

TEST_CASE("model and report persistence") {
  const auto dir = testing::scratch_dir("kge_io");
  const auto store = testing::random_store(12, 4, 40, 5);
  KgeConfig cfg;
  cfg.dim = 6;
  cfg.model = ModelKind::distmult;
  const auto m = init_model(12, 4, cfg);
  save_model(dir / "m", m, store);
  const auto back = load_model(dir / "m");
  CHECK(back == m);
  CHECK(back.config.dim == 6);

  const auto rep = filtered_relation_ranking(m, store, store);
  const auto j = report_to_json(rep, store.entity_names(), store.relation_names());
  const auto rb = report_from_json(j);
  CHECK(rb.entries.size() == rep.entries.size());
  CHECK(rb.mrr == doctest::Approx(rep.mrr));
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    CHECK(rb.entries[i].rank == rep.entries[i].rank);
    CHECK(rb.entries[i].distracting == rep.entries[i].distracting);
  }
  const auto csv = report_to_csv(rep, store.entity_names(), store.relation_names());
  CHECK(csv.rfind("h,r,t,rank\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == rep.entries.size() + 1);
}

TEST_CASE("parsers") {
  CHECK(parse_model("transe") == ModelKind::transe);
  CHECK(parse_distance("l2") == Distance::l2);
  CHECK(parse_negative_mode("typed-weight") == NegativeMode::typed_weight);
  CHECK(negative_mode_name(NegativeMode::typed_mixture) == "typed-mixture");
  CHECK_THROWS_AS(parse_model("rescal"), Error);
}
