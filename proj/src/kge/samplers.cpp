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
#include <fstream>
#include <unordered_map>

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/kge.hpp"

namespace relsim::kge {

namespace {

constexpr int kMaxRedraws = 32;

std::uint32_t draw_other(std::size_t n, std::uint32_t original, Rng& rng) {
  auto x = static_cast<std::uint32_t>(rng.below(n - 1));
  return x >= original ? x + 1 : x;
}

Triple corrupt_uniform_once(const Triple& t, std::size_t entities, std::size_t relations, Rng& rng) {
  const bool entity_ok = entities >= 2;
  const bool relation_ok = relations >= 2;
  require(entity_ok || relation_ok, Errc::contract, "uniform_negative: vocabulary too small to corrupt");
  while (true) {
    const std::size_t pos = rng.below(3);
    Triple out = t;
    if (pos == 1) {
      if (!relation_ok) continue;
      out.relation = draw_other(relations, t.relation, rng);
    } else {
      if (!entity_ok) continue;
      if (pos == 0) out.head = draw_other(entities, t.head, rng);
      else out.tail = draw_other(entities, t.tail, rng);
    }
    return out;
  }
}

}  // namespace

void NegSamplerConfig::validate() const {
  require(temperature_init > 0.0 && temperature_floor > 0.0, Errc::config, "temperatures must be positive");
  require(temperature_floor <= temperature_init, Errc::config, "temperature_floor must not exceed temperature_init");
  require(halve_every > 0, Errc::config, "halve_every must be positive");
}

double temperature_schedule(std::size_t epoch, const NegSamplerConfig& cfg) {
  const auto halvings = static_cast<double>(epoch / cfg.halve_every);
  return std::max(cfg.temperature_floor, cfg.temperature_init * std::pow(0.5, halvings));
}

void TypedSamplerConfig::validate(std::size_t num_relations) const {
  require(type_of.size() == num_relations, Errc::config, "type mapping must cover every relation");
  require(mix_alpha > 0.0 && mix_decay > 0.0 && mix_every > 0, Errc::config, "mixture schedule must be positive");
  require(weight_eps >= 0.0 && weight_increase >= 0.0 && weight_every > 0, Errc::config,
          "weight schedule must be non-negative");
}

double TypedSamplerConfig::alpha_at(std::size_t epoch) const {
  return std::min(1.0, mix_alpha * std::pow(mix_decay, static_cast<double>(epoch / mix_every)));
}

double TypedSamplerConfig::eps_at(std::size_t epoch) const {
  return weight_eps + weight_increase * static_cast<double>(epoch / weight_every);
}

std::vector<std::uint32_t> types_from_prefix(const std::vector<std::string>& relation_names) {
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> out;
  out.reserve(relation_names.size());
  for (const auto& name : relation_names) {
    std::size_t start = 0;
    while (start < name.size() && name[start] == '/') ++start;
    const std::size_t end = name.find('/', start);
    const std::string prefix = name.substr(start, end == std::string::npos ? std::string::npos : end - start);
    auto [it, fresh] = ids.emplace(prefix, static_cast<std::uint32_t>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::uint32_t> load_type_file(const std::filesystem::path& path,
                                          const std::vector<std::string>& relation_names) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_artifact, "cannot open type file: " + path.string());
  std::unordered_map<std::string, std::string> type_name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = io::split_tabs(line);
    if (f.size() < 2) fail(Errc::parse, path.string() + ":" + std::to_string(lineno) + ": expected relation\\ttype");
    type_name[f[0]] = f[1];
  }
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> out;
  for (const auto& r : relation_names) {
    auto it = type_name.find(r);
    if (it == type_name.end()) fail(Errc::input, path.string() + ": no type for relation " + r);
    auto [id, fresh] = ids.emplace(it->second, static_cast<std::uint32_t>(ids.size()));
    out.push_back(id->second);
  }
  return out;
}

Triple uniform_negative(const Triple& t, const kb::TripleStore& store, Rng& rng, const kb::TripleStore* known) {
  Triple out = corrupt_uniform_once(t, store.num_entities(), store.num_relations(), rng);
  for (int i = 0; known && known->contains(out) && i < kMaxRedraws; ++i)
    out = corrupt_uniform_once(t, store.num_entities(), store.num_relations(), rng);
  return out;
}

std::vector<double> similarity_distribution(RelationId r, const similarity::SimilarityMatrix& sim,
                                            double temperature) {
  require(temperature > 0.0, Errc::contract, "temperature must be positive");
  const std::size_t R = sim.size();
  require(r < R, Errc::index, "relation id outside the similarity matrix");
  require(R >= 2, Errc::contract, "similarity negatives need at least two relations");
  // S^(1/T) computed in log space, shifted by the max for stability.
  std::vector<double> logw(R, -INFINITY);
  double mx = -INFINITY;
  for (std::size_t j = 0; j < R; ++j) {
    if (j == r) continue;
    const double s = sim(r, j);
    logw[j] = s > 0.0 ? std::log(s) / temperature : -INFINITY;
    mx = std::max(mx, logw[j]);
  }
  std::vector<double> p(R, 0.0);
  double total = 0.0;
  if (std::isfinite(mx)) {
    for (std::size_t j = 0; j < R; ++j) {
      if (j == r) continue;
      p[j] = std::exp(logw[j] - mx);
      total += p[j];
    }
  }
  if (!(total > 0.0)) {
    for (std::size_t j = 0; j < R; ++j) p[j] = j == r ? 0.0 : 1.0;
    total = static_cast<double>(R - 1);
  }
  for (auto& x : p) x /= total;
  return p;
}

Triple similarity_negative(const Triple& t, const similarity::SimilarityMatrix& sim, double temperature, Rng& rng) {
  const auto p = similarity_distribution(t.relation, sim, temperature);
  Triple out = t;
  out.relation = static_cast<RelationId>(sample_weighted(p, rng));
  return out;
}

std::vector<double> typed_distribution(const Triple& t, const kb::TripleStore& store, const TypedSamplerConfig& cfg,
                                       TypedVariant variant, std::size_t epoch) {
  const std::size_t R = store.num_relations();
  require(cfg.type_of.size() == R, Errc::contract, "type mapping must cover every relation");
  std::vector<char> allowed(R, 1);
  for (auto r : store.relations_between(t.head, t.tail)) allowed[r] = 0;
  allowed[t.relation] = 0;
  std::size_t n_all = 0, n_same = 0;
  for (std::size_t j = 0; j < R; ++j) {
    if (!allowed[j]) continue;
    ++n_all;
    if (cfg.type_of[j] == cfg.type_of[t.relation]) ++n_same;
  }
  std::vector<double> p(R, 0.0);
  if (n_all == 0) {
    // Every relation co-occurs with (h, t): fall back to uniform over R \ {r}.
    for (std::size_t j = 0; j < R; ++j) p[j] = j == t.relation ? 0.0 : 1.0 / static_cast<double>(R - 1);
    return p;
  }
  const auto same = [&](std::size_t j) { return cfg.type_of[j] == cfg.type_of[t.relation]; };
  if (variant == TypedVariant::mixture) {
    const double a = n_same == 0 ? 1.0 : cfg.alpha_at(epoch);
    for (std::size_t j = 0; j < R; ++j) {
      if (!allowed[j]) continue;
      p[j] = a / static_cast<double>(n_all);
      if (n_same > 0 && same(j)) p[j] += (1.0 - a) / static_cast<double>(n_same);
    }
  } else {
    const double eps = cfg.eps_at(epoch);
    double total = 0.0;
    for (std::size_t j = 0; j < R; ++j) {
      if (!allowed[j]) continue;
      p[j] = same(j) ? 1.0 + eps : 1.0;
      total += p[j];
    }
    for (auto& x : p) x /= total;
  }
  return p;
}

Triple typed_negative(const Triple& t, const kb::TripleStore& store, const TypedSamplerConfig& cfg,
                      TypedVariant variant, std::size_t epoch, Rng& rng) {
  require(store.num_relations() >= 2, Errc::contract, "typed negatives need at least two relations");
  const auto p = typed_distribution(t, store, cfg, variant, epoch);
  Triple out = t;
  out.relation = static_cast<RelationId>(sample_weighted(p, rng));
  return out;
}

Triple NegativeSampler::draw(const Triple& t, std::size_t epoch, Rng& rng) const {
  require(store != nullptr, Errc::contract, "negative sampler has no store");
  const kb::TripleStore* known = filter_known ? store : nullptr;
  if (mode == NegativeMode::uniform) return uniform_negative(t, *store, rng, known);

  Triple out = t;
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    const std::size_t pos = rng.below(3);
    if (pos != 1 || store->num_relations() < 2) {
      if (store->num_entities() < 2) continue;
      out = t;
      if (pos == 0) out.head = draw_other(store->num_entities(), t.head, rng);
      else out.tail = draw_other(store->num_entities(), t.tail, rng);
    } else if (mode == NegativeMode::similarity) {
      require(similarity.has_value(), Errc::config, "similarity negatives need a similarity matrix");
      out = similarity_negative(t, similarity->similarity, temperature_schedule(epoch, *similarity), rng);
    } else {
      require(typed.has_value(), Errc::config, "typed negatives need a type mapping");
      const auto variant = mode == NegativeMode::typed_mixture ? TypedVariant::mixture : TypedVariant::weight;
      out = typed_negative(t, *store, *typed, variant, epoch, rng);
    }
    if (!known || !known->contains(out)) break;
  }
  return out;
}

}  // namespace relsim::kge
