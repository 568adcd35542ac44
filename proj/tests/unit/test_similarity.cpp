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
#include <numbers>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "relsim/error.hpp"
#include "relsim/kge.hpp"
#include "relsim/parallel.hpp"
#include "relsim/similarity.hpp"

using namespace relsim;
using namespace relsim::similarity;
using factdist::Params;
using factdist::zero_params;

namespace {

// Relation 0 puts its mass on (e0, e0), relation 1 on (e1, e1).
Params<float> point_mass_params() {
  auto p = zero_params<float>(3, 2, 2, 2);
  p.entity_emb(0, 0) = 1.0f;
  p.entity_emb(1, 1) = 1.0f;
  p.relation_emb(0, 0) = 50.0f;
  p.relation_emb(1, 1) = 50.0f;
  p.head_net.w1(0, 0) = p.head_net.w1(1, 1) = 1.0f;
  p.head_net.w2(0, 0) = p.head_net.w2(1, 1) = 1.0f;
  p.tail_net.w1(0, 2) = p.tail_net.w1(1, 3) = 1.0f;
  p.tail_net.w2(0, 0) = p.tail_net.w2(1, 1) = 1.0f;
  return p;
}

std::vector<double> softmax(std::vector<double> x) {
  double z = 0.0;
  for (double v : x) z += std::exp(v);
  for (double& v : x) v = std::exp(v) / z;
  return x;
}

}  // namespace

TEST_CASE("kl of a relation with itself is zero") {
  const auto p = factdist::init_params<float>(12, 3, 4, 8, 2);
  for (std::size_t n : {1u, 7u, 500u}) CHECK(kl_mc(p, 1, 1, n, 99) == 0.0);
  CHECK(kl_exact(p, 2, 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(similarity::similarity(p, 0, 0, 64, 3) == 1.0);
  const auto z = zero_params<float>(8, 3, 2, 2);
  CHECK(std::abs(kl_exact(z, 0, 2)) < 1e-9);
}

TEST_CASE("exact kl on three hand-set entities") {
  auto p = zero_params<double>(3, 2, 2, 2);
  p.entity_emb(0, 0) = 1;
  p.entity_emb(1, 1) = 1;
  p.entity_emb(2, 0) = p.entity_emb(2, 1) = 1;
  p.relation_emb(0, 0) = 1;
  p.relation_emb(1, 1) = 2;
  p.head_net.w1(0, 0) = p.head_net.w1(1, 1) = 1;
  p.head_net.w2(0, 0) = p.head_net.w2(1, 1) = 1;
  // Tail network is zero, so P(t | h, r) = 1/3 and only the heads differ.
  const auto a = softmax({1, 0, 1});
  const auto b = softmax({0, 2, 2});
  double expected = 0.0;
  for (int i = 0; i < 3; ++i) expected += a[i] * std::log(a[i] / b[i]);
  CHECK(kl_exact(p, 0, 1) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(kl_exact(p, 0, 1) > 0.0);
}

TEST_CASE("exact kl refuses large vocabularies") {
  const auto p = zero_params<float>(30, 2, 2, 2);
  CHECK_THROWS_AS(kl_exact(p, 0, 1, 20), Error);
  try {
    kl_exact(p, 0, 1, 20);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::refused);
  }
}

TEST_CASE("monte-carlo kl converges to the exact value") {
  const auto p = factdist::init_params<float>(20, 3, 8, 16, 5);
  for (kb::RelationId a = 0; a < 3; ++a)
    for (kb::RelationId b = 0; b < 3; ++b) {
      if (a == b) continue;
      CAPTURE(a);
      CAPTURE(b);
      CHECK(std::abs(kl_mc(p, a, b, 100000, 7) - kl_exact(p, a, b)) < 0.05);
    }
}

TEST_CASE("disjoint point masses") {
  const auto p = point_mass_params();
  CHECK(kl_exact(p, 0, 1) > 10.0);
  CHECK(kl_mc(p, 0, 1, 100, 1) > 10.0);
  CHECK(similarity::similarity(p, 0, 1, 100, 1) < 1e-4);
}

TEST_CASE("similarity is symmetric and bounded") {
  const auto p = factdist::init_params<float>(15, 4, 4, 8, 8);
  for (kb::RelationId a = 0; a < 4; ++a)
    for (kb::RelationId b = 0; b < 4; ++b) {
      const double s = similarity::similarity(p, a, b, 16, 4);
      CHECK(s == similarity::similarity(p, b, a, 16, 4));
      CHECK(s > 0.0);
      CHECK(s <= 1.0);
    }
}

TEST_CASE("divergence_to_similarity") {
  CHECK(divergence_to_similarity(0.0, 0.0) == 1.0);
  CHECK(divergence_to_similarity(-0.3, -0.1) == 1.0);
  CHECK(divergence_to_similarity(2.0, 0.5) == doctest::Approx(std::exp(-2.0)));
  for (double y = 0.0; y <= 3.0; y += 0.25) {
    double prev = divergence_to_similarity(0.0, y);
    for (double x = 0.1; x <= 5.0; x += 0.1) {
      const double g = divergence_to_similarity(x, y);
      CHECK(g <= prev);
      prev = g;
    }
  }
}

TEST_CASE("similarity matrix") {
  SUBCASE("shape and diagonal") {
    const auto p = factdist::init_params<float>(10, 3, 4, 8, 1);
    const auto m = similarity_matrix(p, 32, 5);
    CHECK(m.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(m(i, i) == 1.0f);
      for (std::size_t j = 0; j < 3; ++j) CHECK(m(i, j) == m(j, i));
    }
    CHECK_NOTHROW(m.validate());
    CHECK(m.sample_count == 32);
  }
  SUBCASE("zero weights give all ones") {
    const auto m = similarity_matrix(zero_params<float>(6, 4, 2, 2), 16, 0);
    for (float v : m.values.flat()) CHECK(v == 1.0f);
  }
  SUBCASE("entries match pairwise calls") {
    const auto p = factdist::init_params<float>(12, 10, 4, 8, 3);
    const auto m = similarity_matrix(p, 64, 11);
    for (kb::RelationId a = 0; a < 10; ++a)
      for (kb::RelationId b = a + 1; b < 10; ++b)
        CHECK(m(a, b) == static_cast<float>(similarity::similarity(p, a, b, 64, 11)));
  }
  SUBCASE("independent of the worker count") {
    const auto p = factdist::init_params<float>(12, 7, 4, 8, 3);
    const auto saved = thread_count();
    set_thread_count(1);
    const auto one = similarity_matrix(p, 64, 2);
    set_thread_count(5);
    const auto five = similarity_matrix(p, 64, 2);
    set_thread_count(saved);
    CHECK(one.values == five.values);
  }
}

TEST_CASE("matrix persistence") {
  const auto dir = testing::scratch_dir("sim_matrix");
  auto m = testing::matrix_of({{1, 0.5, 0.25}, {0.5, 1, 0.125}, {0.25, 0.125, 1}});
  m.sample_count = 10;
  m.seed = 4;
  m.source = "ckpt";
  save_matrix(dir / "m", m);
  const auto back = load_matrix(dir / "m");
  CHECK(back.values == m.values);
  CHECK(back.relation_names == m.relation_names);
  CHECK(back.seed == 4);
  const auto csv = matrix_to_csv(m);
  CHECK(csv.find("r0,r1,0.5") != std::string::npos);
  CHECK(matrix_from_csv(csv).values == m.values);
  auto bad = m;
  bad.values(0, 1) = 0.7f;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("baseline similarities") {
  BaselineEmbeddings e;
  e.relation_names = {"a", "b", "c"};
  SUBCASE("transe cosine") {
    e.kind = BaselineKind::transe;
    e.dim = 2;
    e.payload = Matrix<float>(3, 2);
    e.payload(0, 0) = 1;
    e.payload(1, 0) = 3;
    e.payload(2, 1) = 2;
    CHECK(baseline_similarity(e, 0, 1) == doctest::Approx(std::exp(1.0)));
    CHECK(baseline_similarity(e, 0, 2) == doctest::Approx(1.0));
    e.payload(2, 1) = 0;
    CHECK_THROWS_AS(baseline_similarity(e, 0, 2), Error);
  }
  SUBCASE("rescal") {
    e.kind = BaselineKind::rescal;
    e.dim = 2;
    e.payload = Matrix<float>(3, 4);
    e.payload(1, 0) = 3;
    e.payload(1, 3) = 4;
    e.payload(2, 1) = 1;
    CHECK(baseline_similarity(e, 0, 1) == doctest::Approx(std::exp(-5.0)));
    for (kb::RelationId r = 0; r < 3; ++r)
      for (kb::RelationId o = 0; o < 3; ++o) CHECK(baseline_similarity(e, r, r) >= baseline_similarity(e, r, o));
  }
  SUBCASE("rotate wraps phases") {
    e.kind = BaselineKind::rotate;
    e.dim = 2;
    e.payload = Matrix<float>(3, 2);
    e.payload(0, 0) = 0.1f;
    e.payload(1, 0) = static_cast<float>(2 * std::numbers::pi - 0.1);
    e.payload(2, 1) = 1.0f;
    CHECK(baseline_similarity(e, 0, 0) == 1.0);
    CHECK(baseline_similarity(e, 0, 1) == doctest::Approx(std::exp(-0.2)).epsilon(1e-5));
    CHECK(baseline_similarity(e, 0, 2) == doctest::Approx(std::exp(-1.1)).epsilon(1e-5));
    e.payload(2, 1) = 7.0f;
    CHECK_THROWS_AS(e.validate(), Error);
  }
  SUBCASE("matrix keeps the native range") {
    e.kind = BaselineKind::distmult;
    e.dim = 1;
    e.payload = Matrix<float>(3, 1, 1.0f);
    e.payload(2, 0) = -1.0f;
    const auto m = baseline_matrix(e);
    CHECK(m.method == "distmult");
    CHECK(m(0, 1) == doctest::Approx(std::exp(1.0)));
    CHECK(m(0, 2) == doctest::Approx(std::exp(-1.0)));
  }
}

TEST_CASE("baseline from a kge checkpoint") {
  const auto dir = testing::scratch_dir("sim_baseline");
  const auto store = testing::random_store(10, 3, 30, 1);
  kge::KgeConfig cfg;
  cfg.dim = 4;
  const auto m = kge::init_model(10, 3, cfg);
  kge::save_model(dir / "kge", m, store);
  const auto emb = load_baseline(dir / "kge");
  CHECK(emb.kind == BaselineKind::transe);
  CHECK(emb.payload == m.relation_emb);
  save_baseline(dir / "base", emb);
  CHECK(load_baseline(dir / "base").payload == m.relation_emb);
}
