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

#include "relsim/analysis.hpp"
#include "relsim/error.hpp"
#include "relsim/io.hpp"

namespace relsim::analysis {

std::size_t RankHistogram::total() const {
  std::size_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

std::size_t RankHistogram::window(std::size_t first, std::size_t width) const {
  require(first >= 1, Errc::contract, "rank windows start at 1");
  std::size_t s = 0;
  for (std::size_t r = first; r < first + width && r - 1 < counts.size(); ++r) s += counts[r - 1];
  return s;
}

std::size_t similarity_rank(const similarity::SimilarityMatrix& sim, kb::RelationId gold, kb::RelationId other) {
  require(gold < sim.size() && other < sim.size(), Errc::index, "similarity_rank: relation id out of range");
  require(gold != other, Errc::contract, "similarity_rank: the gold relation has no rank");
  const float s = sim(gold, other);
  std::size_t rank = 0;
  for (kb::RelationId j = 0; j < sim.size(); ++j)
    if (j != gold && sim(gold, j) >= s) ++rank;
  return rank;
}

RankHistogram distracting_rank_histogram(const kge::RankingReport& report, const similarity::SimilarityMatrix& sim) {
  RankHistogram h;
  h.counts.assign(sim.size() > 0 ? sim.size() - 1 : 0, 0);
  h.test_triples = report.entries.size();
  for (const auto& e : report.entries)
    for (auto d : e.distracting) ++h.counts[similarity_rank(sim, e.triple.relation, d) - 1];
  return h;
}

std::string histogram_to_csv(const RankHistogram& h) {
  std::ostringstream out;
  out << "rank,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) out << k + 1 << ',' << h.counts[k] << '\n';
  return out.str();
}

nlohmann::json histogram_to_json(const RankHistogram& h) {
  return {{"format_version", io::kFormatVersion},
          {"kind", "rank_histogram"},
          {"test_triples", h.test_triples},
          {"total", h.total()},
          {"counts", h.counts}};
}

RankHistogram histogram_from_json(const nlohmann::json& j) {
  io::check_format_version(j, "rank histogram");
  if (j.value("kind", "") != "rank_histogram") fail(Errc::parse, "not a rank histogram");
  RankHistogram h;
  try {
    h.test_triples = j.at("test_triples").get<std::size_t>();
    h.counts = j.at("counts").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& ex) {
    fail(Errc::parse, std::string("rank histogram: ") + ex.what());
  }
  return h;
}

}  // namespace relsim::analysis
