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
#include <limits>
#include <numeric>

#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/io.hpp"
#include "relsim/rng.hpp"

namespace relsim::factdist {

void TrainConfig::validate() const {
  require(embedding_dim > 0, Errc::config, "embedding_dim must be positive");
  require(learning_rate > 0.0, Errc::config, "learning_rate must be positive");
  require(batch_size > 0, Errc::config, "batch_size must be positive");
  require(max_epochs > 0, Errc::config, "max_epochs must be positive");
  require(patience > 0, Errc::config, "patience must be positive");
  require(adam_beta1 > 0.0 && adam_beta1 < 1.0, Errc::config, "adam_beta1 must lie in (0, 1)");
  require(adam_beta2 > 0.0 && adam_beta2 < 1.0, Errc::config, "adam_beta2 must lie in (0, 1)");
  require(adam_eps > 0.0, Errc::config, "adam_eps must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j{{"embedding_dim", embedding_dim}, {"hidden_dim", effective_hidden()},
                   {"learning_rate", learning_rate}, {"batch_size", batch_size},
                   {"max_epochs", max_epochs},       {"patience", patience},
                   {"adam_beta1", adam_beta1},       {"adam_beta2", adam_beta2},
                   {"adam_eps", adam_eps},           {"seed", seed}};
  j["pretrained_init"] = pretrained_init ? nlohmann::json(pretrained_init->generic_string()) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.seed = j.value("seed", c.seed);
    if (j.contains("pretrained_init") && j["pretrained_init"].is_string())
      c.pretrained_init = j["pretrained_init"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::config, std::string("factdist config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

void copy_pretrained(Params<float>& p, const std::filesystem::path& dir) {
  const auto doc = io::read_json(dir / "manifest.json");
  io::check_format_version(doc, dir.string());
  const std::size_t entities = doc.at("num_entities").get<std::size_t>();
  const std::size_t relations = doc.at("num_relations").get<std::size_t>();
  const std::size_t dim = doc.at("embedding_dim").get<std::size_t>();
  require(entities == p.num_entities() && relations == p.num_relations() && dim == p.dim(), Errc::config,
          "pretrained embeddings in " + dir.string() + " do not match store size or embedding_dim");
  auto e = io::read_f32(dir / "entity_emb.bin", entities * dim);
  auto r = io::read_f32(dir / "relation_emb.bin", relations * dim);
  std::copy(e.begin(), e.end(), p.entity_emb.data());
  std::copy(r.begin(), r.end(), p.relation_emb.data());
}

}  // namespace

TrainResult train(const kb::TripleStore& store, const kb::TripleStore& valid, const TrainConfig& config) {
  config.validate();
  require(!store.empty(), Errc::empty_store, "factdist training needs a non-empty store");
  require(valid.num_entities() <= store.num_entities() && valid.num_relations() <= store.num_relations(),
          Errc::config, "validation vocabulary exceeds training vocabulary");

  auto params = init_params<float>(store.num_entities(), store.num_relations(), config.embedding_dim,
                                   config.effective_hidden(), config.seed);
  if (config.pretrained_init) copy_pretrained(params, *config.pretrained_init);
  auto state = AdamState<float>::zeros_like(params);

  const std::span<const Triple> train_set = store.triples();
  const std::span<const Triple> valid_set = valid.triples();

  TrainResult result;
  result.initial_train_nll = mean_nll(params, train_set);
  result.params = params;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::uint32_t> order(train_set.size());
  std::vector<Triple> batch;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(derive_seed(config.seed, {0xe90cu, epoch}));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      auto lg = nll_loss_and_grads(params, batch);
      if (!std::isfinite(lg.loss))
        fail(Errc::training, "factdist training diverged (non-finite loss) at epoch " + std::to_string(epoch));
      epoch_loss += lg.loss * static_cast<double>(batch.size());
      adam_step(params, state, lg.grads, config);
    }
    result.train_nll.push_back(epoch_loss / static_cast<double>(train_set.size()));
    const double vloss = valid_set.empty() ? mean_nll(params, train_set) : mean_nll(params, valid_set);
    if (!std::isfinite(vloss))
      fail(Errc::training, "factdist training diverged (non-finite validation loss) at epoch " + std::to_string(epoch));
    result.valid_nll.push_back(vloss);
    if (vloss < best) {
      best = vloss;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace relsim::factdist
