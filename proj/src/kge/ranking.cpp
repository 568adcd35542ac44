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
#include <sstream>

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/kge.hpp"
#include "relsim/parallel.hpp"

namespace relsim::kge {

void RankingReport::finalize() {
  mrr = hits1 = hits3 = 0.0;
  if (entries.empty()) return;
  for (const auto& e : entries) {
    mrr += 1.0 / static_cast<double>(e.rank);
    hits1 += e.rank <= 1 ? 1.0 : 0.0;
    hits3 += e.rank <= 3 ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(entries.size());
  mrr /= n;
  hits1 /= n;
  hits3 /= n;
}

TripleRank rank_relation(const Triple& gold, std::span<const double> scores, const kb::TripleStore* known) {
  require(gold.relation < scores.size(), Errc::index, "rank_relation: gold relation outside score vector");
  TripleRank out{gold, 1, {}};
  const double g = scores[gold.relation];
  std::vector<std::pair<double, RelationId>> above;
  for (RelationId r = 0; r < scores.size(); ++r) {
    if (r == gold.relation) continue;
    if (known && known->contains(Triple{gold.head, r, gold.tail})) continue;
    if (scores[r] >= g) above.emplace_back(scores[r], r);
  }
  std::stable_sort(above.begin(), above.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [s, r] : above) out.distracting.push_back(r);
  out.rank = 1 + above.size();
  return out;
}

RankingReport filtered_relation_ranking(const KgeModel& m, const kb::TripleStore& known, const kb::TripleStore& test) {
  for (const auto& t : test.triples())
    require(t.head < m.num_entities() && t.tail < m.num_entities() && t.relation < m.num_relations(), Errc::index,
            "filtered_relation_ranking: test triple outside model vocabulary");
  RankingReport report;
  report.entries.resize(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const Triple& t = test[i];
    const auto scores = relation_scores(m, t.head, t.tail);
    report.entries[i] = rank_relation(t, scores, &known);
  });
  report.finalize();
  return report;
}

nlohmann::json report_to_json(const RankingReport& r, const std::vector<std::string>& entity_names,
                              const std::vector<std::string>& relation_names) {
  io::json entries = io::json::array();
  for (const auto& e : r.entries) {
    io::json distracting = io::json::array();
    for (auto d : e.distracting) distracting.push_back(relation_names.at(d));
    entries.push_back({{"head", entity_names.at(e.triple.head)},
                       {"relation", relation_names.at(e.triple.relation)},
                       {"tail", entity_names.at(e.triple.tail)},
                       {"head_id", e.triple.head},
                       {"relation_id", e.triple.relation},
                       {"tail_id", e.triple.tail},
                       {"rank", e.rank},
                       {"distracting", distracting},
                       {"distracting_ids", e.distracting}});
  }
  return {{"format_version", io::kFormatVersion},
          {"kind", "ranking_report"},
          {"count", r.entries.size()},
          {"mrr", r.mrr},
          {"hits1", r.hits1},
          {"hits3", r.hits3},
          {"entries", entries}};
}

RankingReport report_from_json(const nlohmann::json& j) {
  io::check_format_version(j, "ranking report");
  if (j.value("kind", "") != "ranking_report") fail(Errc::parse, "not a ranking report");
  RankingReport r;
  try {
    for (const auto& e : j.at("entries")) {
      TripleRank tr;
      tr.triple = {e.at("head_id").get<EntityId>(), e.at("relation_id").get<RelationId>(),
                   e.at("tail_id").get<EntityId>()};
      tr.rank = e.at("rank").get<std::size_t>();
      tr.distracting = e.at("distracting_ids").get<std::vector<RelationId>>();
      require(tr.rank >= 1, Errc::parse, "ranking report: rank must be positive");
      r.entries.push_back(std::move(tr));
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(Errc::parse, std::string("ranking report: ") + ex.what());
  }
  r.finalize();
  return r;
}

std::string report_to_csv(const RankingReport& r, const std::vector<std::string>& entity_names,
                          const std::vector<std::string>& relation_names) {
  std::ostringstream out;
  out << "h,r,t,rank\n";
  for (const auto& e : r.entries)
    out << io::csv_field(entity_names.at(e.triple.head)) << ',' << io::csv_field(relation_names.at(e.triple.relation))
        << ',' << io::csv_field(entity_names.at(e.triple.tail)) << ',' << e.rank << '\n';
  return out.str();
}

}  // namespace relsim::kge
