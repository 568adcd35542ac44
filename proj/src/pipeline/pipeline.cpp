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
#include <cstdlib>
#include <set>

#include "relsim/analysis.hpp"
#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/pipeline.hpp"

namespace relsim::pipeline {

using nlohmann::json;

namespace {

constexpr Stage kOrder[] = {Stage::data, Stage::factdist, Stage::sim, Stage::kge,
                            Stage::redun, Stage::analyze, Stage::margin};

// Reads block[key] as T, reporting failures as "block.key: ...".
template <typename T>
void read_field(const json& block, const std::string& path, const char* key, T& out) {
  if (!block.contains(key)) return;
  try {
    out = block.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(Errc::config, path + "." + key + ": " + e.what());
  }
}

void reject_unknown(const json& block, const std::string& path, std::initializer_list<const char*> known) {
  if (!block.is_object()) fail(Errc::config, path + ": expected an object");
  for (auto it = block.begin(); it != block.end(); ++it)
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }))
      fail(Errc::config, path + "." + it.key() + ": unknown field");
}

template <typename F>
auto wrap_block(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != Errc::config) throw;
    fail(Errc::config, path + ": " + e.what());
  } catch (const json::exception& e) {
    fail(Errc::config, path + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Stage parse_stage(const std::string& s) {
  for (auto st : kOrder)
    if (stage_name(st) == s) return st;
  fail(Errc::config, "unknown stage: " + s);
}

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::data: return "data";
    case Stage::factdist: return "factdist";
    case Stage::sim: return "sim";
    case Stage::kge: return "kge";
    case Stage::redun: return "redun";
    case Stage::analyze: return "analyze";
    case Stage::margin: return "margin";
  }
  return "data";
}

std::vector<Stage> parse_stages(const std::string& list) {
  std::set<Stage> chosen;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) chosen.insert(parse_stage(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  require(!chosen.empty(), Errc::config, "no stages selected");
  return {chosen.begin(), chosen.end()};
}

std::vector<Stage> all_stages() { return {std::begin(kOrder), std::end(kOrder)}; }

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  reject_unknown(j, "config", {"seed", "run_dir", "data", "factdist", "sim", "kge", "redun", "analyze", "margin"});
  if (!j.contains("seed")) fail(Errc::config, "config.seed: required");
  read_field(j, "config", "seed", c.seed);
  std::string run_dir = "run";
  read_field(j, "config", "run_dir", run_dir);
  c.run_dir = resolve(base_dir, run_dir);

  if (j.contains("data")) {
    const auto& b = j["data"];
    reject_unknown(b, "data", {"path", "format", "valid_fraction", "reverb_keep_above", "crp"});
    std::string path, format = "tsv";
    read_field(b, "data", "path", path);
    read_field(b, "data", "format", format);
    if (!path.empty()) c.data.path = resolve(base_dir, path);
    c.data.format = wrap_block("data.format", [&] { return kb::parse_format(format); });
    read_field(b, "data", "valid_fraction", c.data.valid_fraction);
    read_field(b, "data", "reverb_keep_above", c.data.load.reverb_keep_above);
    if (b.contains("crp")) {
      const auto& cb = b["crp"];
      reject_unknown(cb, "data.crp", {"alpha", "min_count"});
      kb::CrpConfig crp;
      read_field(cb, "data.crp", "alpha", crp.alpha);
      read_field(cb, "data.crp", "min_count", crp.min_count);
      c.data.crp = crp;
    }
  }
  if (j.contains("factdist")) {
    json b = j["factdist"];
    if (b.contains("seed")) fail(Errc::config, "factdist.seed: stage seeds derive from config.seed");
    std::optional<std::string> pre;
    if (b.contains("pretrained_init")) {
      pre = b["pretrained_init"].get<std::string>();
      b.erase("pretrained_init");
    }
    c.factdist = wrap_block("factdist", [&] { return factdist::TrainConfig::from_json(b); });
    if (pre) c.factdist.pretrained_init = resolve(base_dir, *pre);
  }
  if (j.contains("sim")) {
    const auto& b = j["sim"];
    reject_unknown(b, "sim", {"samples"});
    read_field(b, "sim", "samples", c.sim.samples);
  }
  if (j.contains("kge")) {
    json b = j["kge"];
    if (b.contains("seed")) fail(Errc::config, "kge.seed: stage seeds derive from config.seed");
    read_field(b, "kge", "temperature_init", c.kge.temperature_init);
    read_field(b, "kge", "halve_every", c.kge.halve_every);
    read_field(b, "kge", "temperature_floor", c.kge.temperature_floor);
    read_field(b, "kge", "mix_alpha", c.kge.typed.mix_alpha);
    read_field(b, "kge", "mix_decay", c.kge.typed.mix_decay);
    read_field(b, "kge", "mix_every", c.kge.typed.mix_every);
    read_field(b, "kge", "weight_eps", c.kge.typed.weight_eps);
    read_field(b, "kge", "weight_increase", c.kge.typed.weight_increase);
    read_field(b, "kge", "weight_every", c.kge.typed.weight_every);
    if (b.contains("types_file")) c.kge.types_file = resolve(base_dir, b["types_file"].get<std::string>());
    for (const char* k : {"temperature_init", "halve_every", "temperature_floor", "mix_alpha", "mix_decay", "mix_every",
                          "weight_eps", "weight_increase", "weight_every", "types_file"})
      b.erase(k);
    reject_unknown(b, "kge", {"model", "dim", "margin", "distance", "learning_rate", "epochs", "batch_size",
                              "negative_mode", "filter_negatives"});
    c.kge.config = wrap_block("kge", [&] { return kge::KgeConfig::from_json(b); });
  }
  if (j.contains("redun")) {
    const auto& b = j["redun"];
    reject_unknown(b, "redun", {"lambda", "sample_mode", "n", "thresholds", "per_threshold", "labels",
                                "pr_thresholds", "bootstrap"});
    read_field(b, "redun", "lambda", c.redun.lambda);
    std::string mode = "proposal";
    read_field(b, "redun", "sample_mode", mode);
    c.redun.sample.mode = wrap_block("redun.sample_mode", [&] { return redundancy::parse_sample_mode(mode); });
    read_field(b, "redun", "n", c.redun.sample.n);
    read_field(b, "redun", "thresholds", c.redun.sample.thresholds);
    read_field(b, "redun", "per_threshold", c.redun.sample.per_threshold);
    read_field(b, "redun", "pr_thresholds", c.redun.pr_thresholds);
    read_field(b, "redun", "bootstrap", c.redun.bootstrap);
    if (b.contains("labels")) c.redun.labels = resolve(base_dir, b["labels"].get<std::string>());
  }
  if (j.contains("analyze")) {
    const auto& b = j["analyze"];
    reject_unknown(b, "analyze", {"annotations", "shuffles"});
    if (b.contains("annotations")) c.analyze.annotations = resolve(base_dir, b["annotations"].get<std::string>());
    read_field(b, "analyze", "shuffles", c.analyze.shuffles);
  }
  if (j.contains("margin")) {
    const auto& b = j["margin"];
    reject_unknown(b, "margin", {"loss", "alpha", "temperature_init", "temperature_decay", "temperature_floor",
                                 "epochs", "learning_rate", "batch_size", "features"});
    auto& m = c.margin.config;
    std::string loss = "softmax-margin";
    read_field(b, "margin", "loss", loss);
    if (loss == "softmax-margin") m.loss = margin::LossKind::softmax_margin;
    else if (loss == "cross-entropy") m.loss = margin::LossKind::cross_entropy;
    else fail(Errc::config, "margin.loss: expected softmax-margin or cross-entropy");
    read_field(b, "margin", "alpha", m.alpha);
    read_field(b, "margin", "temperature_init", m.schedule.init);
    read_field(b, "margin", "temperature_decay", m.schedule.decay);
    read_field(b, "margin", "temperature_floor", m.schedule.floor);
    read_field(b, "margin", "epochs", m.epochs);
    read_field(b, "margin", "learning_rate", m.learning_rate);
    read_field(b, "margin", "batch_size", m.batch_size);
    read_field(b, "margin", "features", c.margin.features);
    if (c.margin.features != "kge" && c.margin.features != "factdist")
      fail(Errc::config, "margin.features: expected kge or factdist");
  }

  c.data.crp = c.data.crp ? std::optional<kb::CrpConfig>(kb::CrpConfig{c.data.crp->alpha, c.data.crp->min_count,
                                                                       derive_seed(c.seed, {0xc0u})})
                          : std::nullopt;
  c.factdist.seed = derive_seed(c.seed, {1});
  c.kge.config.seed = derive_seed(c.seed, {3});
  c.redun.sample.seed = derive_seed(c.seed, {4});
  c.margin.config.seed = derive_seed(c.seed, {6});
  wrap_block("factdist", [&] { c.factdist.validate(); return 0; });
  wrap_block("kge", [&] { c.kge.config.validate(); return 0; });
  wrap_block("margin", [&] { c.margin.config.validate(); return 0; });
  require(c.data.valid_fraction >= 0.0 && c.data.valid_fraction < 1.0, Errc::config,
          "data.valid_fraction: must be in [0, 1)");
  require(c.sim.samples > 0, Errc::config, "sim.samples: must be positive");
  require(c.redun.lambda > 0.0 && c.redun.lambda <= 1.0, Errc::config, "redun.lambda: must be in (0, 1]");
  require(!c.redun.labels || !c.redun.pr_thresholds.empty(), Errc::config,
          "redun.pr_thresholds: required when redun.labels is set");
  return c;
}

json RunConfig::to_json() const {
  json db{{"path", data.path.string()},
            {"format", data.format == kb::TripleFormat::tsv ? "tsv" : "reverb"},
            {"valid_fraction", data.valid_fraction},
            {"reverb_keep_above", data.load.reverb_keep_above}};
  if (data.crp) db["crp"] = {{"alpha", data.crp->alpha}, {"min_count", data.crp->min_count}};
  json fd = factdist.to_json();
  fd.erase("seed");
  json kg = kge.config.to_json();
  kg.erase("seed");
  kg["temperature_init"] = kge.temperature_init;
  kg["halve_every"] = kge.halve_every;
  kg["temperature_floor"] = kge.temperature_floor;
  kg["mix_alpha"] = kge.typed.mix_alpha;
  kg["mix_decay"] = kge.typed.mix_decay;
  kg["mix_every"] = kge.typed.mix_every;
  kg["weight_eps"] = kge.typed.weight_eps;
  kg["weight_increase"] = kge.typed.weight_increase;
  kg["weight_every"] = kge.typed.weight_every;
  if (kge.types_file) kg["types_file"] = kge.types_file->string();
  json rd{{"lambda", redun.lambda},
          {"sample_mode", redun.sample.mode == redundancy::SampleMode::proposal ? "proposal" : "per-threshold"},
          {"n", redun.sample.n},
          {"thresholds", redun.sample.thresholds},
          {"per_threshold", redun.sample.per_threshold},
          {"pr_thresholds", redun.pr_thresholds},
          {"bootstrap", redun.bootstrap}};
  if (redun.labels) rd["labels"] = redun.labels->string();
  json an{{"shuffles", analyze.shuffles}};
  if (analyze.annotations) an["annotations"] = analyze.annotations->string();
  json mg = margin.config.to_json();
  mg.erase("seed");
  mg["features"] = margin.features;
  return {{"seed", seed}, {"run_dir", run_dir.string()}, {"data", db}, {"factdist", fd}, {"sim", {{"samples", sim.samples}}},
          {"kge", kg}, {"redun", rd}, {"analyze", an}, {"margin", mg}};
}

void RunConfig::validate(const std::vector<Stage>& stages) const {
  auto has = [&](Stage s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
  auto exists = [](const fs::path& p, const std::string& field) {
    if (!fs::exists(p)) fail(Errc::config, field + ": path does not exist: " + p.string());
  };
  if (has(Stage::data)) {
    if (data.path.empty()) fail(Errc::config, "data.path: required for the data stage");
    exists(data.path, "data.path");
  }
  if (has(Stage::factdist) && factdist.pretrained_init) exists(*factdist.pretrained_init, "factdist.pretrained_init");
  if (has(Stage::kge) && kge.types_file) exists(*kge.types_file, "kge.types_file");
  if (has(Stage::redun) && redun.labels) exists(*redun.labels, "redun.labels");
  if (has(Stage::analyze) && analyze.annotations) exists(*analyze.annotations, "analyze.annotations");
}

std::string RunConfig::hash() const { return io::sha256_hex(to_json().dump()); }

RunConfig load_run_config(const fs::path& path) {
  json j = io::read_json(path);
  if (const char* env = std::getenv("RELSIM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      if (j.is_object()) j["seed"] = v;
    } catch (const std::exception&) {
      fail(Errc::config, std::string("RELSIM_SEED: not an unsigned integer: ") + env);
    }
  }
  return RunConfig::from_json(j, path.parent_path());
}

namespace {

void need(const fs::path& p, const std::string& stage) {
  if (!fs::exists(p))
    fail(Errc::missing_artifact, "missing artifact " + p.string() + " (run the '" + stage + "' stage first)");
}

struct Ctx {
  const RunConfig& cfg;
  fs::path dir;

  fs::path store() const { return dir / "data" / "store.json"; }
  fs::path train() const { return dir / "data" / "train.json"; }
  fs::path valid() const { return dir / "data" / "valid.json"; }
  fs::path truth() const { return dir / "data" / "truth.json"; }
  fs::path factdist() const { return dir / "factdist"; }
  fs::path sim() const { return dir / "sim"; }
  fs::path kge_model() const { return dir / "kge" / "model"; }
  fs::path kge_report() const { return dir / "kge" / "ranking.json"; }

  kb::TripleStore load(const fs::path& p) const {
    need(p, "data");
    return kb::load_store(p);
  }
  similarity::SimilarityMatrix matrix() const {
    need(sim() / "manifest.json", "sim");
    return similarity::load_matrix(sim());
  }
};

void run_data(const Ctx& c) {
  const auto& d = c.cfg.data;
  auto store = kb::load_triples(d.path, d.format, d.load);
  if (d.crp) {
    auto split = kb::crp_split(store, *d.crp);
    kb::save_truth(split.truth, split.store, c.truth());
    store = std::move(split.store);
  }
  kb::save_store(store, c.store());
  const auto vs = kb::split_validation(store, d.valid_fraction, derive_seed(c.cfg.seed, {0xd0u}));
  kb::save_store(vs.train, c.train());
  kb::save_store(vs.valid, c.valid());
  io::write_json(c.dir / "data" / "split.json", {{"format_version", io::kFormatVersion},
                                                  {"kind", "validation_split"},
                                                  {"train", vs.train.size()},
                                                  {"valid", vs.valid.size()},
                                                  {"requested_valid", vs.requested_valid},
                                                  {"shortfall", vs.shortfall}});
}

void run_factdist(const Ctx& c) {
  const auto train = c.load(c.train());
  const auto valid = c.load(c.valid());
  const auto res = factdist::train(train, valid, c.cfg.factdist);
  factdist::save_checkpoint(c.factdist(), res.params,
                            {c.cfg.factdist, train.entity_names(), train.relation_names()});
  io::write_json(c.factdist() / "training.json", {{"format_version", io::kFormatVersion},
                                                  {"kind", "factdist_training"},
                                                  {"initial_train_nll", res.initial_train_nll},
                                                  {"train_nll", res.train_nll},
                                                  {"valid_nll", res.valid_nll},
                                                  {"best_epoch", res.best_epoch}});
}

void run_sim(const Ctx& c) {
  need(c.factdist() / "manifest.json", "factdist");
  factdist::CheckpointInfo info;
  const auto params = factdist::load_checkpoint(c.factdist(), &info);
  const auto m = similarity::similarity_matrix(params, c.cfg.sim.samples, derive_seed(c.cfg.seed, {2}),
                                               info.relation_names, "factdist");
  similarity::save_matrix(c.sim(), m);
  io::write_text(c.sim() / "matrix.csv", similarity::matrix_to_csv(m));
}

void run_kge(const Ctx& c) {
  const auto store = c.load(c.store());
  const auto train = c.load(c.train());
  const auto valid = c.load(c.valid());
  const auto& kb = c.cfg.kge;
  kge::NegativeSampler neg;
  neg.mode = kb.config.negative_mode;
  neg.store = &store;
  neg.filter_known = kb.config.filter_negatives;
  if (neg.mode == kge::NegativeMode::similarity) {
    neg.similarity = kge::NegSamplerConfig{c.matrix(), kb.temperature_init, kb.halve_every, kb.temperature_floor};
    neg.similarity->validate();
  } else if (neg.mode != kge::NegativeMode::uniform) {
    auto typed = kb.typed;
    typed.type_of = kb.types_file ? kge::load_type_file(*kb.types_file, store.relation_names())
                                  : kge::types_from_prefix(store.relation_names());
    neg.typed = typed;
  }
  const auto res = kge::train_kge(train, valid, kb.config, neg);
  kge::save_model(c.kge_model(), res.model, store);
  io::write_json(c.dir / "kge" / "training.json",
                 {{"format_version", io::kFormatVersion}, {"kind", "kge_training"}, {"epoch_loss", res.epoch_loss}});
  const auto report = kge::filtered_relation_ranking(res.model, store, valid);
  io::write_json(c.kge_report(), kge::report_to_json(report, store.entity_names(), store.relation_names()));
  io::write_text(c.dir / "kge" / "ranking.csv",
                 kge::report_to_csv(report, store.entity_names(), store.relation_names()));
}

void run_redun(const Ctx& c) {
  const auto m = c.matrix();
  const auto& r = c.cfg.redun;
  const fs::path out = c.dir / "redun";
  const auto merged = redundancy::merge_relations(m, r.lambda);
  json pairs = json::array(), clusters = json::array();
  for (const auto& [a, b] : merged.pairs)
    pairs.push_back({m.relation_names.at(a), m.relation_names.at(b), static_cast<double>(m(a, b))});
  for (const auto& cl : merged.clusters) {
    json names = json::array();
    for (auto id : cl) names.push_back(m.relation_names.at(id));
    clusters.push_back(names);
  }
  json merge_doc{{"format_version", io::kFormatVersion}, {"kind", "merge_result"}, {"lambda", r.lambda},
                 {"pairs", pairs}, {"clusters", clusters}};
  if (fs::exists(c.truth())) {
    const auto store = c.load(c.store());
    const auto truth = kb::load_truth(c.truth(), store);
    const auto prf = redundancy::toy_prf(merged, truth);
    const auto best = redundancy::best_toy_threshold(m, truth);
    merge_doc["toy"] = {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1},
                        {"best_lambda", best.lambda}, {"best_precision", best.prf.precision},
                        {"best_recall", best.prf.recall}, {"best_f1", best.prf.f1}};
  }
  io::write_json(out / "merge.json", merge_doc);
  const auto rows = redundancy::sample_annotation_batch(m, r.sample);
  io::write_text(out / "annotation.csv", redundancy::annotation_to_csv(rows, m.relation_names));
  if (r.labels) {
    const auto labeled = redundancy::annotation_from_csv(io::read_text(*r.labels), m);
    const auto curve = redundancy::pr_curve(labeled, r.pr_thresholds, r.bootstrap, derive_seed(c.cfg.seed, {5}));
    io::write_json(out / "pr.json", redundancy::pr_to_json(curve));
    io::write_text(out / "pr.csv", redundancy::pr_to_csv(curve));
  }
}

void run_analyze(const Ctx& c) {
  const auto m = c.matrix();
  const fs::path out = c.dir / "analyze";
  need(c.kge_report(), "kge");
  const auto report = kge::report_from_json(io::read_json(c.kge_report()));
  const auto hist = analysis::distracting_rank_histogram(report, m);
  io::write_json(out / "histogram.json", analysis::histogram_to_json(hist));
  io::write_text(out / "histogram.csv", analysis::histogram_to_csv(hist));
  if (c.cfg.analyze.annotations) {
    const auto table = analysis::annotation_table_from_csv(io::read_text(*c.cfg.analyze.annotations));
    const auto loo = analysis::loo_agreement(table);
    const auto human = table.mean_scores();
    const auto model = analysis::model_scores(table, m);
    const double rho = analysis::spearman(human, model);
    const double p = analysis::permutation_pvalue(human, model, c.cfg.analyze.shuffles, derive_seed(c.cfg.seed, {7}));
    io::write_json(out / "human.json", {{"format_version", io::kFormatVersion},
                                        {"kind", "human_agreement"},
                                        {"loo_mean", loo.mean},
                                        {"loo_std", loo.std},
                                        {"skipped_subjects", loo.skipped},
                                        {"model_spearman", rho},
                                        {"permutation_p", p},
                                        {"shuffles", c.cfg.analyze.shuffles}});
  }
}

void run_margin(const Ctx& c) {
  const auto store = c.load(c.store());
  const auto train = c.load(c.train());
  const auto valid = c.load(c.valid());
  const fs::path feat = c.cfg.margin.features == "kge" ? c.kge_model() : c.factdist();
  need(feat / "manifest.json", c.cfg.margin.features);
  const auto emb = margin::load_entity_features(feat);
  std::optional<similarity::SimilarityMatrix> m;
  if (c.cfg.margin.config.loss == margin::LossKind::softmax_margin) m = c.matrix();
  const auto res = margin::train_toy_classifier(train, valid, m ? &*m : nullptr, emb, c.cfg.margin.config);
  io::write_json(c.dir / "margin" / "report.json", margin::toy_report_to_json(res.report));
  io::write_text(c.dir / "margin" / "confusion.csv", margin::confusion_to_csv(res.report, store.relation_names()));
}

}  // namespace

RunResult run_pipeline(const RunConfig& config, const std::vector<Stage>& stages) {
  config.validate(stages);
  const Ctx c{config, config.run_dir};
  fs::create_directories(c.dir);
  for (auto s : stages) {
    switch (s) {
      case Stage::data: run_data(c); break;
      case Stage::factdist: run_factdist(c); break;
      case Stage::sim: run_sim(c); break;
      case Stage::kge: run_kge(c); break;
      case Stage::redun: run_redun(c); break;
      case Stage::analyze: run_analyze(c); break;
      case Stage::margin: run_margin(c); break;
    }
  }
  RunResult res{c.dir, config.hash(), {}};
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(c.dir))
    if (e.is_regular_file() && e.path() != c.dir / "manifest.json") files.push_back(fs::relative(e.path(), c.dir));
  std::sort(files.begin(), files.end());
  json records = json::array();
  for (const auto& f : files) records.push_back(io::file_record(c.dir, c.dir / f));
  json names = json::array();
  for (auto s : stages) names.push_back(stage_name(s));
  io::write_json(c.dir / "manifest.json", {{"format_version", io::kFormatVersion},
                                           {"kind", "run"},
                                           {"version", kVersion},
                                           {"config_hash", res.config_hash},
                                           {"seed", config.seed},
                                           {"stages", names},
                                           {"config", config.to_json()},
                                           {"files", records}});
  res.files = std::move(files);
  return res;
}

}  // namespace relsim::pipeline
