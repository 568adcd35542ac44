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

#include <charconv>
#include <cstdio>
#include <sstream>

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/redundancy.hpp"
#include "relsim/rng.hpp"

namespace relsim::redundancy {

int aggregate_label(std::size_t valid_votes, std::size_t votes, const AggregationConfig& cfg) {
  require(valid_votes <= votes, Errc::input, "aggregate_label: more valid votes than votes");
  require(votes == cfg.panel, Errc::input,
          "aggregate_label: expected " + std::to_string(cfg.panel) + " votes, got " + std::to_string(votes));
  return valid_votes >= cfg.min_valid ? 1 : 0;
}

SampleMode parse_sample_mode(const std::string& s) {
  if (s == "proposal") return SampleMode::proposal;
  if (s == "per-threshold") return SampleMode::per_threshold;
  fail(Errc::config, "unknown sample mode: " + s);
}

namespace {

std::string numbered(char prefix, std::size_t group, std::size_t i, bool grouped) {
  char buf[48];
  if (grouped) std::snprintf(buf, sizeof buf, "%c%zu-%05zu", prefix, group, i);
  else std::snprintf(buf, sizeof buf, "%c%05zu", prefix, i);
  return buf;
}

}  // namespace

std::vector<AnnotationRow> sample_annotation_batch(const similarity::SimilarityMatrix& sim, const SampleRequest& req) {
  const std::size_t n = sim.size();
  std::vector<RelationPair> pairs;
  std::vector<double> weights;
  for (RelationId i = 0; i < n; ++i)
    for (RelationId j = i + 1; j < n; ++j) {
      pairs.emplace_back(i, j);
      weights.push_back(sim(i, j));
    }
  std::vector<AnnotationRow> rows;
  if (req.mode == SampleMode::proposal) {
    require(!pairs.empty(), Errc::degenerate_input, "sample_annotation_batch: need at least two relations");
    const auto cdf = cumulative(weights);
    require(cdf.back() > 0.0, Errc::degenerate_input, "sample_annotation_batch: all similarities are zero");
    Rng rng(derive_seed(req.seed, {0x7100u}));
    for (std::size_t k = 0; k < req.n; ++k) {
      const std::size_t idx = sample_cdf(cdf, rng);
      rows.push_back({numbered('q', 0, k, false), pairs[idx], weights[idx], weights[idx], -1});
    }
    return rows;
  }
  for (std::size_t g = 0; g < req.thresholds.size(); ++g) {
    const double lambda = req.thresholds[g];
    std::vector<std::size_t> above;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (weights[k] >= lambda) above.push_back(k);
    Rng rng(derive_seed(req.seed, {0x7500u, g}));
    rng.shuffle(above);
    above.resize(std::min(above.size(), req.per_threshold));
    for (std::size_t k = 0; k < above.size(); ++k) {
      const auto idx = above[k];
      rows.push_back({numbered('u', g, k, true), pairs[idx], weights[idx], lambda, -1});
    }
  }
  return rows;
}

std::string annotation_to_csv(const std::vector<AnnotationRow>& rows, const std::vector<std::string>& relation_names) {
  std::ostringstream out;
  out << "pair_id,r1_name,r2_name,similarity,proposal_weight,label\n";
  for (const auto& r : rows)
    out << io::csv_field(r.pair_id) << ',' << io::csv_field(relation_names.at(r.pair.first)) << ','
        << io::csv_field(relation_names.at(r.pair.second)) << ',' << io::format_number(r.similarity) << ','
        << io::format_number(r.proposal_weight) << ',' << r.label << '\n';
  return out.str();
}

namespace {

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(Errc::parse, where + ": not a number: " + s);
  return v;
}

long parse_int(const std::string& s, const std::string& where) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(Errc::parse, where + ": not an integer: " + s);
  return v;
}

}  // namespace

std::vector<AnnotationRow> annotation_from_csv(const std::string& text, const similarity::SimilarityMatrix& sim,
                                               const AggregationConfig& agg) {
  std::istringstream in(text);
  std::string line;
  std::vector<AnnotationRow> rows;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    const std::string where = "annotation line " + std::to_string(lineno);
    if (header) {
      header = false;
      if (f.size() != 6 || f[0] != "pair_id" || f[5] != "label")
        fail(Errc::parse, "annotation header must be pair_id,r1_name,r2_name,similarity,proposal_weight,label");
      continue;
    }
    if (f.size() != 6) fail(Errc::parse, where + ": expected 6 fields");
    const auto a = sim.find(f[1]);
    const auto b = sim.find(f[2]);
    if (!a || !b) fail(Errc::input, where + ": unknown relation " + (!a ? f[1] : f[2]));
    AnnotationRow r;
    r.pair_id = f[0];
    r.pair = make_pair_sorted(*a, *b);
    r.similarity = parse_double(f[3], where);
    r.proposal_weight = parse_double(f[4], where);
    const auto slash = f[5].find('/');
    if (slash != std::string::npos) {
      const long k = parse_int(f[5].substr(0, slash), where);
      const long m = parse_int(f[5].substr(slash + 1), where);
      if (k < 0 || m < 0) fail(Errc::parse, where + ": negative vote count");
      r.label = aggregate_label(static_cast<std::size_t>(k), static_cast<std::size_t>(m), agg);
    } else {
      const long l = parse_int(f[5], where);
      if (l < -1 || l > 1) fail(Errc::parse, where + ": label must be -1, 0 or 1");
      r.label = static_cast<int>(l);
    }
    if (r.pair_id.empty() || (r.pair_id[0] != 'q' && r.pair_id[0] != 'u'))
      fail(Errc::parse, where + ": pair_id must start with q or u");
    if (r.pair_id[0] == 'q' && !(r.proposal_weight > 0.0))
      fail(Errc::parse, where + ": proposal rows need a positive proposal_weight");
    rows.push_back(std::move(r));
  }
  if (header) fail(Errc::parse, "annotation file is empty");
  return rows;
}

}  // namespace relsim::redundancy
