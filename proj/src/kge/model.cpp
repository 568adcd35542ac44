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

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/kernels.hpp"
#include "relsim/kge.hpp"

namespace relsim::kge {

namespace fs = std::filesystem;

ModelKind parse_model(const std::string& s) {
  if (s == "transe") return ModelKind::transe;
  if (s == "distmult") return ModelKind::distmult;
  fail(Errc::config, "unknown kge model: " + s);
}

Distance parse_distance(const std::string& s) {
  if (s == "l1") return Distance::l1;
  if (s == "l2") return Distance::l2;
  fail(Errc::config, "unknown distance: " + s);
}

NegativeMode parse_negative_mode(const std::string& s) {
  if (s == "uniform") return NegativeMode::uniform;
  if (s == "similarity") return NegativeMode::similarity;
  if (s == "typed-mixture") return NegativeMode::typed_mixture;
  if (s == "typed-weight") return NegativeMode::typed_weight;
  fail(Errc::config, "unknown negative mode: " + s);
}

std::string model_name(ModelKind k) { return k == ModelKind::transe ? "transe" : "distmult"; }

std::string negative_mode_name(NegativeMode m) {
  switch (m) {
    case NegativeMode::uniform: return "uniform";
    case NegativeMode::similarity: return "similarity";
    case NegativeMode::typed_mixture: return "typed-mixture";
    case NegativeMode::typed_weight: return "typed-weight";
  }
  return "uniform";
}

void KgeConfig::validate() const {
  require(dim > 0, Errc::config, "kge dim must be positive");
  require(margin > 0.0, Errc::config, "kge margin must be positive");
  require(learning_rate > 0.0, Errc::config, "kge learning_rate must be positive");
  require(epochs > 0, Errc::config, "kge epochs must be positive");
  require(batch_size > 0, Errc::config, "kge batch_size must be positive");
}

nlohmann::json KgeConfig::to_json() const {
  return {{"model", model_name(model)},
          {"dim", dim},
          {"margin", margin},
          {"distance", distance == Distance::l1 ? "l1" : "l2"},
          {"learning_rate", learning_rate},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"seed", seed},
          {"negative_mode", negative_mode_name(negative_mode)},
          {"filter_negatives", filter_negatives}};
}

KgeConfig KgeConfig::from_json(const nlohmann::json& j) {
  KgeConfig c;
  try {
    if (j.contains("model")) c.model = parse_model(j["model"].get<std::string>());
    c.dim = j.value("dim", c.dim);
    c.margin = j.value("margin", c.margin);
    if (j.contains("distance")) c.distance = parse_distance(j["distance"].get<std::string>());
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    if (j.contains("negative_mode")) c.negative_mode = parse_negative_mode(j["negative_mode"].get<std::string>());
    c.filter_negatives = j.value("filter_negatives", c.filter_negatives);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::config, std::string("kge config: ") + e.what());
  }
  return c;
}

KgeModel init_model(std::size_t entities, std::size_t relations, const KgeConfig& config) {
  config.validate();
  KgeModel m{config.model, Matrix<float>(entities, config.dim), Matrix<float>(relations, config.dim), config};
  Rng rng(derive_seed(config.seed, {0x46e1u}));
  const double bound = 6.0 / std::sqrt(static_cast<double>(config.dim));
  auto init = [&](Matrix<float>& mat) {
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      auto row = mat.row(i);
      double n2 = 0.0;
      for (auto& x : row) {
        x = static_cast<float>(rng.uniform(-bound, bound));
        n2 += static_cast<double>(x) * x;
      }
      const double n = std::sqrt(n2);
      for (auto& x : row) x = static_cast<float>(x / n);
    }
  };
  init(m.entity_emb);
  init(m.relation_emb);
  return m;
}

double kge_score(const KgeModel& m, EntityId h, RelationId r, EntityId t) {
  require(h < m.num_entities() && t < m.num_entities(), Errc::index, "kge_score: entity id out of range");
  require(r < m.num_relations(), Errc::index, "kge_score: relation id out of range");
  const auto& k = kernels::active<float>();
  const std::size_t d = m.entity_emb.cols();
  const float* hv = m.entity_emb.row(h).data();
  const float* rv = m.relation_emb.row(r).data();
  const float* tv = m.entity_emb.row(t).data();
  if (m.kind == ModelKind::distmult) return k.trilinear(hv, rv, tv, d);
  if (m.config.distance == Distance::l1) return -static_cast<double>(k.l1_translation(hv, rv, tv, d));
  return -std::sqrt(static_cast<double>(k.l2sq_translation(hv, rv, tv, d)));
}

std::vector<double> relation_scores(const KgeModel& m, EntityId h, EntityId t) {
  std::vector<double> s(m.num_relations());
  for (RelationId r = 0; r < s.size(); ++r) s[r] = kge_score(m, h, r, t);
  return s;
}

double margin_hinge(double pos_score, double neg_score, double margin) {
  return std::max(0.0, margin - pos_score + neg_score);
}

void save_model(const fs::path& dir, const KgeModel& m, const kb::TripleStore& vocab) {
  fs::create_directories(dir);
  io::write_f32(dir / "entity_emb.bin", m.entity_emb.flat());
  io::write_f32(dir / "relation_emb.bin", m.relation_emb.flat());
  io::json doc{{"format_version", io::kFormatVersion},
               {"kind", "kge"},
               {"model", model_name(m.kind)},
               {"num_entities", m.num_entities()},
               {"num_relations", m.num_relations()},
               {"embedding_dim", m.entity_emb.cols()},
               {"config", m.config.to_json()},
               {"entity_names", vocab.entity_names()},
               {"relation_names", vocab.relation_names()},
               {"files", io::json::array({io::file_record(dir, dir / "entity_emb.bin"),
                                          io::file_record(dir, dir / "relation_emb.bin")})}};
  io::write_json(dir / "manifest.json", doc);
}

KgeModel load_model(const fs::path& dir) {
  const auto doc = io::read_json(dir / "manifest.json");
  io::check_format_version(doc, dir.string());
  if (doc.value("kind", "") != "kge") fail(Errc::parse, dir.string() + ": not a kge checkpoint");
  try {
    KgeModel m;
    m.config = KgeConfig::from_json(doc.at("config"));
    m.kind = parse_model(doc.at("model").get<std::string>());
    const std::size_t e = doc.at("num_entities"), r = doc.at("num_relations"), d = doc.at("embedding_dim");
    m.entity_emb = Matrix<float>(e, d);
    m.relation_emb = Matrix<float>(r, d);
    const auto ev = io::read_f32(dir / "entity_emb.bin", e * d);
    const auto rv = io::read_f32(dir / "relation_emb.bin", r * d);
    std::copy(ev.begin(), ev.end(), m.entity_emb.data());
    std::copy(rv.begin(), rv.end(), m.relation_emb.data());
    return m;
  } catch (const nlohmann::json::exception& ex) {
    fail(Errc::parse, dir.string() + ": " + ex.what());
  }
}

}  // namespace relsim::kge
