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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relsim/analysis.hpp"
#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/io.hpp"
#include "relsim/kb_core.hpp"
#include "relsim/kge.hpp"
#include "relsim/margin.hpp"
#include "relsim/parallel.hpp"
#include "relsim/pipeline.hpp"
#include "relsim/redundancy.hpp"
#include "relsim/similarity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace relsim;

namespace {

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

void emit_text(const std::optional<std::string>& out, const std::string& text) {
  if (out) io::write_text(*out, text);
  else std::cout << text;
}

std::string join(const std::vector<fs::path>& files) {
  std::string s;
  for (const auto& f : files) s += (s.empty() ? "" : ", ") + f.string();
  return s;
}

kb::RelationId relation_or_fail(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<kb::RelationId>(i);
  fail(Errc::input, "unknown relation: " + name);
}

// ---- data ----

struct DataLoad {
  std::string input, format = "tsv", out;
  std::size_t keep_above = 10;
  void run() const {
    kb::LoadOptions opts;
    opts.reverb_keep_above = keep_above;
    const auto store = kb::load_triples(input, kb::parse_format(format), opts);
    const auto files = kb::save_store(store, out);
    emit({{"entities", store.num_entities()}, {"relations", store.num_relations()}, {"triples", store.size()},
          {"files", join(files)}});
  }
};

struct DataSplit {
  std::string store, out_dir;
  double valid_fraction = 0.1;
  std::uint64_t seed = 0;
  void run() const {
    const auto s = kb::load_store(store);
    const auto vs = kb::split_validation(s, valid_fraction, seed);
    kb::save_store(vs.train, fs::path(out_dir) / "train.json");
    kb::save_store(vs.valid, fs::path(out_dir) / "valid.json");
    if (vs.shortfall)
      std::cerr << "warning: validation split holds " << vs.valid.size() << " of " << vs.requested_valid
                << " requested triples\n";
    emit({{"train", vs.train.size()}, {"valid", vs.valid.size()}, {"requested_valid", vs.requested_valid},
          {"shortfall", vs.shortfall}});
  }
};

struct DataCrp {
  std::string store, out, truth;
  kb::CrpConfig cfg;
  void run() const {
    const auto s = kb::load_store(store);
    const auto split = kb::crp_split(s, cfg);
    kb::save_store(split.store, out);
    kb::save_truth(split.truth, split.store, truth);
    emit({{"sub_relations", split.store.num_relations()}, {"triples", split.store.size()}});
  }
};

// ---- factdist ----

struct FactdistTrain {
  std::string train, valid, out;
  std::optional<std::string> config, pretrained;
  factdist::TrainConfig cfg;
  void run() {
    if (config) {
      auto seed = cfg.seed;
      cfg = factdist::TrainConfig::from_json(io::read_json(*config));
      if (!io::read_json(*config).contains("seed")) cfg.seed = seed;
    }
    if (pretrained) cfg.pretrained_init = *pretrained;
    const auto tr = kb::load_store(train);
    const auto va = valid.empty() ? tr.with_triples({}) : kb::load_store(valid);
    const auto res = factdist::train(tr, va, cfg);
    factdist::save_checkpoint(out, res.params, {cfg, tr.entity_names(), tr.relation_names()});
    const json summary{{"format_version", io::kFormatVersion},
                       {"kind", "factdist_training"},
                       {"initial_train_nll", res.initial_train_nll},
                       {"train_nll", res.train_nll},
                       {"valid_nll", res.valid_nll},
                       {"best_epoch", res.best_epoch}};
    io::write_json(fs::path(out) / "training.json", summary);
    emit({{"best_epoch", res.best_epoch},
          {"initial_train_nll", res.initial_train_nll},
          {"final_train_nll", res.train_nll.empty() ? res.initial_train_nll : res.train_nll.back()}});
  }
};

struct FactdistSample {
  std::string checkpoint, relation;
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  void run() const {
    factdist::CheckpointInfo info;
    const auto p = factdist::load_checkpoint(checkpoint, &info);
    const auto r = relation_or_fail(info.relation_names, relation);
    std::string text = "head,tail\n";
    for (const auto& [h, t] : factdist::sample_pairs(p, r, n, seed))
      text += io::csv_field(info.entity_names.at(h)) + "," + io::csv_field(info.entity_names.at(t)) + "\n";
    emit_text(out, text);
  }
};

// ---- sim ----

struct SimMatrix {
  std::optional<std::string> checkpoint, baseline;
  std::string out;
  std::size_t samples = similarity::kDefaultSamples;
  std::uint64_t seed = 0;
  void run() const {
    if (checkpoint.has_value() == baseline.has_value())
      fail(Errc::config, "sim matrix: give exactly one of --checkpoint or --baseline");
    similarity::SimilarityMatrix m;
    if (checkpoint) {
      factdist::CheckpointInfo info;
      const auto p = factdist::load_checkpoint(*checkpoint, &info);
      m = similarity::similarity_matrix(p, samples, seed, info.relation_names, fs::path(*checkpoint).filename().string());
    } else {
      m = similarity::baseline_matrix(similarity::load_baseline(*baseline), fs::path(*baseline).filename().string());
    }
    const auto files = similarity::save_matrix(out, m);
    emit({{"relations", m.size()}, {"method", m.method}, {"files", join(files)}});
  }
};

struct SimPair {
  std::string checkpoint, r1, r2;
  std::size_t samples = similarity::kDefaultSamples;
  std::uint64_t seed = 0;
  bool exact = false;
  void run() const {
    factdist::CheckpointInfo info;
    const auto p = factdist::load_checkpoint(checkpoint, &info);
    const auto a = relation_or_fail(info.relation_names, r1);
    const auto b = relation_or_fail(info.relation_names, r2);
    const double k12 = similarity::kl_mc(p, a, b, samples, similarity::pair_seed(seed, a, b));
    const double k21 = similarity::kl_mc(p, b, a, samples, similarity::pair_seed(seed, b, a));
    json out{{"r1", r1}, {"r2", r2}, {"kl_12", k12}, {"kl_21", k21},
             {"similarity", similarity::divergence_to_similarity(k12, k21)}, {"samples", samples}};
    if (exact) {
      const auto p64 = p.cast<double>();
      const double e12 = similarity::kl_exact(p64, a, b), e21 = similarity::kl_exact(p64, b, a);
      out["exact_kl_12"] = e12;
      out["exact_kl_21"] = e21;
      out["exact_similarity"] = similarity::divergence_to_similarity(e12, e21);
    }
    emit(out);
  }
};

struct SimExport {
  std::string matrix;
  std::optional<std::string> out;
  std::string format = "csv";
  void run() const {
    emit_text(out, pipeline::export_report(fs::path(matrix), pipeline::parse_report_format(format)));
  }
};

// ---- kge ----

struct KgeTrain {
  std::string train, valid, known, out;
  std::string model = "transe", neg = "uniform", distance = "l1";
  std::optional<std::string> sim, types;
  kge::KgeConfig cfg;
  double t_init = 8192.0, t_floor = 16.0;
  std::size_t halve_every = 200;
  void run() {
    cfg.model = kge::parse_model(model);
    cfg.negative_mode = kge::parse_negative_mode(neg);
    cfg.distance = kge::parse_distance(distance);
    const auto tr = kb::load_store(train);
    const auto va = valid.empty() ? tr.with_triples({}) : kb::load_store(valid);
    const auto all = known.empty() ? tr : kb::load_store(known);
    kge::NegativeSampler sampler;
    sampler.mode = cfg.negative_mode;
    sampler.store = &all;
    sampler.filter_known = cfg.filter_negatives;
    if (cfg.negative_mode == kge::NegativeMode::similarity) {
      if (!sim) fail(Errc::config, "kge train: --neg similarity needs --sim");
      sampler.similarity = kge::NegSamplerConfig{similarity::load_matrix(*sim), t_init, halve_every, t_floor};
      sampler.similarity->validate();
    } else if (cfg.negative_mode != kge::NegativeMode::uniform) {
      kge::TypedSamplerConfig typed;
      typed.type_of = types ? kge::load_type_file(*types, all.relation_names())
                            : kge::types_from_prefix(all.relation_names());
      sampler.typed = typed;
    }
    const auto res = kge::train_kge(tr, va, cfg, sampler);
    kge::save_model(out, res.model, all);
    io::write_json(fs::path(out) / "training.json",
                   {{"format_version", io::kFormatVersion}, {"kind", "kge_training"}, {"epoch_loss", res.epoch_loss}});
    emit({{"epochs", res.epoch_loss.size()}, {"final_loss", res.epoch_loss.back()}});
  }
};

struct KgeEval {
  std::string model, known, test;
  bool filtered = true;
  std::optional<std::string> out_json, out_csv;
  void run() const {
    const auto m = kge::load_model(model);
    const auto all = kb::load_store(known);
    const auto te = kb::load_store(test);
    kge::RankingReport report;
    if (filtered) {
      report = kge::filtered_relation_ranking(m, all, te);
    } else {
      for (const auto& t : te.triples())
        report.entries.push_back(kge::rank_relation(t, kge::relation_scores(m, t.head, t.tail), nullptr));
      report.finalize();
    }
    if (out_json) io::write_json(*out_json, kge::report_to_json(report, all.entity_names(), all.relation_names()));
    if (out_csv) io::write_text(*out_csv, kge::report_to_csv(report, all.entity_names(), all.relation_names()));
    emit({{"count", report.entries.size()}, {"mrr", report.mrr}, {"hits1", report.hits1}, {"hits3", report.hits3}});
  }
};

// ---- redun ----

struct RedunMerge {
  std::string sim;
  double lambda = 0.5;
  std::optional<std::string> truth, store, out;
  void run() const {
    const auto m = similarity::load_matrix(sim);
    const auto r = redundancy::merge_relations(m, lambda);
    json clusters = json::array();
    for (const auto& c : r.clusters) {
      json names = json::array();
      for (auto id : c) names.push_back(m.relation_names.at(id));
      clusters.push_back(names);
    }
    json pairs = json::array();
    for (const auto& [a, b] : r.pairs) pairs.push_back({m.relation_names.at(a), m.relation_names.at(b)});
    json doc{{"format_version", io::kFormatVersion}, {"kind", "merge_result"}, {"lambda", lambda},
             {"pairs", pairs}, {"clusters", clusters}};
    if (truth) {
      if (!store) fail(Errc::config, "redun merge: --truth needs --store (the split store)");
      const auto s = kb::load_store(*store);
      const auto t = kb::load_truth(*truth, s);
      const auto prf = redundancy::toy_prf(r, t);
      doc["toy"] = {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
    }
    if (out) io::write_json(*out, doc);
    else emit(doc);
  }
};

struct RedunSample {
  std::string sim, mode = "proposal";
  redundancy::SampleRequest req;
  std::optional<std::string> out;
  void run() {
    req.mode = redundancy::parse_sample_mode(mode);
    if (req.mode == redundancy::SampleMode::per_threshold && req.thresholds.empty())
      fail(Errc::config, "redun sample: per-threshold mode needs --thresholds");
    const auto m = similarity::load_matrix(sim);
    emit_text(out, redundancy::annotation_to_csv(redundancy::sample_annotation_batch(m, req), m.relation_names));
  }
};

struct RedunPr {
  std::string sim, labels;
  std::vector<double> thresholds;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  std::size_t panel = 15, min_valid = 8;
  std::optional<std::string> out_csv, out_json;
  void run() const {
    const auto m = similarity::load_matrix(sim);
    const auto rows = redundancy::annotation_from_csv(io::read_text(labels), m, {panel, min_valid});
    const auto curve = redundancy::pr_curve(rows, thresholds, bootstrap, seed);
    if (out_json) io::write_json(*out_json, redundancy::pr_to_json(curve));
    emit_text(out_csv, redundancy::pr_to_csv(curve));
  }
};

// ---- analyze ----

struct AnalyzeHuman {
  std::string annotations, sim;
  std::size_t shuffles = 10000;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  void run() const {
    const auto table = analysis::annotation_table_from_csv(io::read_text(annotations));
    const auto m = similarity::load_matrix(sim);
    const auto loo = analysis::loo_agreement(table);
    for (auto s : loo.skipped) std::cerr << "warning: subject s" << s + 1 << " has constant scores; skipped\n";
    const auto human = table.mean_scores();
    const auto model = analysis::model_scores(table, m);
    json doc{{"format_version", io::kFormatVersion},
             {"kind", "human_agreement"},
             {"pairs", table.pairs.size()},
             {"subjects", table.subjects()},
             {"loo_mean", loo.mean},
             {"loo_std", loo.std},
             {"skipped_subjects", loo.skipped},
             {"model_spearman", analysis::spearman(human, model)},
             {"permutation_p", analysis::permutation_pvalue(human, model, shuffles, seed)},
             {"shuffles", shuffles}};
    if (out) io::write_json(*out, doc);
    emit(doc);
  }
};

struct AnalyzeErrors {
  std::string report, sim;
  std::optional<std::string> out_csv, out_json;
  void run() const {
    const auto r = kge::report_from_json(io::read_json(report));
    const auto m = similarity::load_matrix(sim);
    const auto h = analysis::distracting_rank_histogram(r, m);
    if (out_json) io::write_json(*out_json, analysis::histogram_to_json(h));
    emit_text(out_csv, analysis::histogram_to_csv(h));
  }
};

// ---- margin ----

struct MarginTrain {
  std::string train, valid, features, out, loss = "softmax-margin";
  std::optional<std::string> sim;
  margin::ToyConfig cfg;
  void run() {
    if (loss == "softmax-margin") cfg.loss = margin::LossKind::softmax_margin;
    else if (loss == "cross-entropy") cfg.loss = margin::LossKind::cross_entropy;
    else fail(Errc::config, "margin train: --loss must be softmax-margin or cross-entropy");
    const auto tr = kb::load_store(train);
    const auto va = kb::load_store(valid);
    const auto emb = margin::load_entity_features(features);
    std::optional<similarity::SimilarityMatrix> m;
    if (sim) m = similarity::load_matrix(*sim);
    const auto res = margin::train_toy_classifier(tr, va, m ? &*m : nullptr, emb, cfg);
    io::write_json(fs::path(out) / "report.json", margin::toy_report_to_json(res.report));
    io::write_text(fs::path(out) / "confusion.csv", margin::confusion_to_csv(res.report, tr.relation_names()));
    emit({{"accuracy", res.report.accuracy}, {"mrr", res.report.ranking.mrr}});
  }
};

// ---- pipeline ----

struct PipelineRun {
  std::string config, stages = "data,factdist,sim,kge,redun,analyze,margin";
  void run() const {
    const auto cfg = pipeline::load_run_config(config);
    const auto res = pipeline::run_pipeline(cfg, pipeline::parse_stages(stages));
    emit({{"run_dir", res.run_dir.string()}, {"config_hash", res.config_hash}, {"files", res.files.size()}});
  }
};

struct PipelineExport {
  std::string artifact, format = "csv";
  std::optional<std::string> out;
  void run() const { emit_text(out, pipeline::export_report(artifact, pipeline::parse_report_format(format))); }
};

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation similarity from fact distributions"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: available cores)");

  auto* data = app.add_subcommand("data", "Triple stores: load, split, CRP")->require_subcommand(1);
  DataLoad dl;
  auto* c = data->add_subcommand("load", "Parse a triple file into a store");
  c->add_option("--in,--input", dl.input, "TSV file")->required();
  c->add_option("--format", dl.format, "tsv | reverb")->capture_default_str();
  c->add_option("--reverb-keep-above", dl.keep_above, "Keep ReVerb patterns with more distinct triples than this")
      ->capture_default_str();
  c->add_option("--out", dl.out, "Store manifest path")->required();
  c->callback([&] { dl.run(); });

  DataSplit ds;
  c = data->add_subcommand("split", "Hold out a validation part");
  c->add_option("--store", ds.store, "Store manifest")->required();
  c->add_option("--valid-frac,--valid-fraction", ds.valid_fraction)->capture_default_str();
  c->add_option("--seed", ds.seed)->capture_default_str();
  c->add_option("--out-dir", ds.out_dir, "Directory for train.json and valid.json")->required();
  c->callback([&] { ds.run(); });

  DataCrp dc;
  c = data->add_subcommand("crp", "Split relations into sub-relations by a Chinese restaurant process");
  c->add_option("--store", dc.store, "Store manifest")->required();
  c->add_option("--alpha", dc.cfg.alpha)->capture_default_str();
  c->add_option("--min-count", dc.cfg.min_count)->capture_default_str();
  c->add_option("--seed", dc.cfg.seed)->capture_default_str();
  c->add_option("--out", dc.out, "Split store manifest path")->required();
  c->add_option("--truth", dc.truth, "Ground-truth JSON path")->required();
  c->callback([&] { dc.run(); });

  auto* fd = app.add_subcommand("factdist", "Fact distribution model")->require_subcommand(1);
  FactdistTrain ft;
  c = fd->add_subcommand("train", "Train P(h, t | r)");
  c->add_option("--store,--train", ft.train, "Training store manifest")->required();
  c->add_option("--valid", ft.valid, "Validation store manifest; without it early stopping watches the training NLL");
  c->add_option("--out", ft.out, "Checkpoint directory")->required();
  c->add_option("--config", ft.config, "TrainConfig JSON (flags below are ignored when given)");
  c->add_option("--dim", ft.cfg.embedding_dim)->capture_default_str();
  c->add_option("--hidden", ft.cfg.hidden_dim, "0 means twice --dim")->capture_default_str();
  c->add_option("--lr", ft.cfg.learning_rate)->capture_default_str();
  c->add_option("--batch", ft.cfg.batch_size)->capture_default_str();
  c->add_option("--epochs", ft.cfg.max_epochs)->capture_default_str();
  c->add_option("--patience", ft.cfg.patience)->capture_default_str();
  c->add_option("--seed", ft.cfg.seed)->capture_default_str();
  c->add_option("--pretrained", ft.pretrained, "TransE checkpoint directory for embedding init");
  c->callback([&] { ft.run(); });

  FactdistSample fs_;
  c = fd->add_subcommand("sample", "Draw (h, t) pairs for a relation");
  c->add_option("--ckpt,--checkpoint", fs_.checkpoint)->required();
  c->add_option("--relation", fs_.relation)->required();
  c->add_option("--n", fs_.n)->capture_default_str();
  c->add_option("--seed", fs_.seed)->capture_default_str();
  c->add_option("--out", fs_.out, "CSV path (default: stdout)");
  c->callback([&] { fs_.run(); });

  auto* sim = app.add_subcommand("sim", "Relation similarity")->require_subcommand(1);
  SimMatrix sm;
  c = sim->add_subcommand("matrix", "Similarity matrix over all relations");
  c->add_option("--ckpt,--checkpoint", sm.checkpoint, "Fact distribution checkpoint");
  c->add_option("--baseline", sm.baseline, "KGE or baseline embedding directory");
  c->add_option("--samples", sm.samples)->capture_default_str();
  c->add_option("--seed", sm.seed)->capture_default_str();
  c->add_option("--out", sm.out, "Matrix directory")->required();
  c->callback([&] { sm.run(); });

  SimPair sp;
  c = sim->add_subcommand("pair", "Divergences and similarity for one pair");
  c->add_option("--ckpt,--checkpoint", sp.checkpoint)->required();
  c->add_option("--r1", sp.r1)->required();
  c->add_option("--r2", sp.r2)->required();
  c->add_option("--samples", sp.samples)->capture_default_str();
  c->add_option("--seed", sp.seed)->capture_default_str();
  c->add_flag("--exact", sp.exact, "Also enumerate the exact divergence (small vocabularies)");
  c->callback([&] { sp.run(); });

  SimExport se;
  c = sim->add_subcommand("export", "Export a matrix as CSV or JSON");
  c->add_option("--matrix", se.matrix)->required();
  c->add_option("--format", se.format, "csv | json")->capture_default_str();
  c->add_option("--out", se.out, "Output path (default: stdout)");
  c->callback([&] { se.run(); });

  auto* kg = app.add_subcommand("kge", "Embedding baselines")->require_subcommand(1);
  KgeTrain kt;
  c = kg->add_subcommand("train", "Train TransE or DistMult");
  c->add_option("--train", kt.train)->required();
  c->add_option("--valid", kt.valid, "Validation store manifest (optional)");
  c->add_option("--known", kt.known, "Store with every known fact (default: --train)");
  c->add_option("--out", kt.out, "Model directory")->required();
  c->add_option("--model", kt.model, "transe | distmult")->capture_default_str();
  c->add_option("--neg", kt.neg, "uniform | similarity | typed-mixture | typed-weight")->capture_default_str();
  c->add_option("--sim", kt.sim, "Similarity matrix for --neg similarity");
  c->add_option("--types", kt.types, "relation<TAB>type file for typed negatives");
  c->add_option("--dim", kt.cfg.dim)->capture_default_str();
  c->add_option("--margin", kt.cfg.margin)->capture_default_str();
  c->add_option("--distance", kt.distance, "l1 | l2")->capture_default_str();
  c->add_option("--lr", kt.cfg.learning_rate)->capture_default_str();
  c->add_option("--epochs", kt.cfg.epochs)->capture_default_str();
  c->add_option("--batch", kt.cfg.batch_size)->capture_default_str();
  c->add_option("--seed", kt.cfg.seed)->capture_default_str();
  c->add_option("--temperature-init", kt.t_init)->capture_default_str();
  c->add_option("--halve-every", kt.halve_every)->capture_default_str();
  c->add_option("--temperature-floor", kt.t_floor)->capture_default_str();
  c->callback([&] { kt.run(); });

  KgeEval ke;
  c = kg->add_subcommand("eval", "Relation prediction ranking");
  c->add_option("--model", ke.model)->required();
  c->add_option("--known", ke.known, "Store with every known fact")->required();
  c->add_option("--test", ke.test)->required();
  c->add_flag("--filtered,!--raw", ke.filtered, "Filter known facts from the candidates (default)");
  c->add_option("--out-json", ke.out_json);
  c->add_option("--out-csv", ke.out_csv);
  c->callback([&] { ke.run(); });

  auto* rd = app.add_subcommand("redun", "Redundant relation merging")->require_subcommand(1);
  RedunMerge rm;
  c = rd->add_subcommand("merge", "Merge relations above a threshold");
  c->add_option("--sim", rm.sim)->required();
  c->add_option("--lambda", rm.lambda)->capture_default_str();
  c->add_option("--truth", rm.truth, "Split ground truth for pair precision/recall");
  c->add_option("--store", rm.store, "Split store matching --truth");
  c->add_option("--out", rm.out);
  c->callback([&] { rm.run(); });

  RedunSample rs;
  c = rd->add_subcommand("sample", "Draw relation pairs for annotation");
  c->add_option("--sim", rs.sim)->required();
  c->add_option("--mode", rs.mode, "proposal | per-threshold")->capture_default_str();
  c->add_option("--n", rs.req.n, "Proposal draws")->capture_default_str();
  c->add_option("--thresholds", rs.req.thresholds, "Comma-separated thresholds")->delimiter(',');
  c->add_option("--per-threshold", rs.req.per_threshold)->capture_default_str();
  c->add_option("--seed", rs.req.seed)->capture_default_str();
  c->add_option("--out", rs.out);
  c->callback([&] { rs.run(); });

  RedunPr rp;
  c = rd->add_subcommand("pr", "Precision-recall curve from labeled pairs");
  c->add_option("--sim", rp.sim)->required();
  c->add_option("--labels", rp.labels)->required();
  c->add_option("--thresholds", rp.thresholds, "Comma-separated, increasing")->delimiter(',')->required();
  c->add_option("--bootstrap", rp.bootstrap)->capture_default_str();
  c->add_option("--seed", rp.seed)->capture_default_str();
  c->add_option("--panel", rp.panel, "Annotators per pair for k/n labels")->capture_default_str();
  c->add_option("--min-valid", rp.min_valid, "Valid votes needed for k/n labels")->capture_default_str();
  c->add_option("--out-csv", rp.out_csv);
  c->add_option("--out-json", rp.out_json);
  c->callback([&] { rp.run(); });

  auto* an = app.add_subcommand("analyze", "Error analysis and human agreement")->require_subcommand(1);
  AnalyzeHuman ah;
  c = an->add_subcommand("human", "Agreement with human similarity ratings");
  c->add_option("--annotations", ah.annotations)->required();
  c->add_option("--sim", ah.sim)->required();
  c->add_option("--shuffles", ah.shuffles)->capture_default_str();
  c->add_option("--seed", ah.seed)->capture_default_str();
  c->add_option("--out", ah.out);
  c->callback([&] { ah.run(); });

  AnalyzeErrors ae;
  c = an->add_subcommand("errors", "Similarity ranks of distracting relations");
  c->add_option("--report", ae.report, "Ranking report JSON")->required();
  c->add_option("--sim", ae.sim)->required();
  c->add_option("--out-csv", ae.out_csv);
  c->add_option("--out-json", ae.out_json);
  c->callback([&] { ae.run(); });

  auto* mg = app.add_subcommand("margin", "Softmax-margin classifier")->require_subcommand(1);
  MarginTrain mt;
  c = mg->add_subcommand("train", "Train the relation classifier on frozen embeddings");
  c->add_option("--train", mt.train)->required();
  c->add_option("--valid", mt.valid)->required();
  c->add_option("--features", mt.features, "KGE or factdist checkpoint")->required();
  c->add_option("--sim", mt.sim);
  c->add_option("--loss", mt.loss, "softmax-margin | cross-entropy")->capture_default_str();
  c->add_option("--alpha", mt.cfg.alpha)->capture_default_str();
  c->add_option("--epochs", mt.cfg.epochs)->capture_default_str();
  c->add_option("--lr", mt.cfg.learning_rate)->capture_default_str();
  c->add_option("--batch", mt.cfg.batch_size)->capture_default_str();
  c->add_option("--seed", mt.cfg.seed)->capture_default_str();
  c->add_option("--out", mt.out)->required();
  c->callback([&] { mt.run(); });

  auto* pl = app.add_subcommand("pipeline", "Configured multi-stage runs")->require_subcommand(1);
  PipelineRun pr;
  c = pl->add_subcommand("run", "Run stages from a JSON config");
  c->add_option("--config", pr.config)->required();
  c->add_option("--stages", pr.stages, "Comma-separated subset of data,factdist,sim,kge,redun,analyze,margin")
      ->capture_default_str();
  c->callback([&] { pr.run(); });

  PipelineExport pe;
  c = pl->add_subcommand("export", "Render an artifact as CSV or JSON");
  c->add_option("--artifact", pe.artifact)->required();
  c->add_option("--format", pe.format, "csv | json")->capture_default_str();
  c->add_option("--out", pe.out);
  c->callback([&] { pe.run(); });

  app.parse_complete_callback([&] {
    if (threads > 0) set_thread_count(threads);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what(), e.get_exit_code());
  } catch (const Error& e) {
    return report_error(std::string(errc_name(e.code())), e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
