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
#include <limits>
#include <sstream>

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/parallel.hpp"
#include "relsim/similarity.hpp"

namespace relsim::similarity {

namespace fs = std::filesystem;

std::optional<RelationId> SimilarityMatrix::find(const std::string& name) const {
  auto it = std::find(relation_names.begin(), relation_names.end(), name);
  if (it == relation_names.end()) return std::nullopt;
  return static_cast<RelationId>(it - relation_names.begin());
}

void SimilarityMatrix::validate() const {
  require(values.rows() == values.cols(), Errc::contract, "similarity matrix must be square");
  require(relation_names.empty() || relation_names.size() == values.rows(), Errc::contract,
          "similarity matrix names do not match its size");
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      const float v = values(i, j);
      require(std::isfinite(v), Errc::contract, "non-finite similarity value");
      require(v == values(j, i), Errc::contract, "similarity matrix is not symmetric");
      if (method == "factdist") {
        require(v > 0.0f && v <= 1.0f, Errc::contract, "similarity outside (0, 1]");
        if (i == j) require(v == 1.0f, Errc::contract, "similarity diagonal must be exactly 1");
      }
    }
  }
}

SimilarityMatrix similarity_matrix(const factdist::Params<float>& p, std::size_t n, std::uint64_t seed,
                                   std::vector<std::string> relation_names, std::string source) {
  require(n >= 1, Errc::contract, "similarity_matrix: n must be at least 1");
  const std::size_t R = p.num_relations();
  SimilarityMatrix m;
  m.values = Matrix<float>(R, R, 1.0f);
  m.sample_count = n;
  m.seed = seed;
  m.source = std::move(source);
  m.relation_names = std::move(relation_names);

  std::vector<std::pair<RelationId, RelationId>> pairs;
  for (RelationId i = 0; i < R; ++i)
    for (RelationId j = i + 1; j < R; ++j) pairs.emplace_back(i, j);
  std::vector<double> scores(pairs.size());
  parallel_blocks(pairs.size(), [&](std::size_t begin, std::size_t end) {
    factdist::ConditionalCache<float> cache(p);
    for (std::size_t k = begin; k < end; ++k) {
      const auto [a, b] = pairs[k];
      scores[k] = divergence_to_similarity(kl_mc(cache, a, b, n, pair_seed(seed, a, b)),
                                           kl_mc(cache, b, a, n, pair_seed(seed, b, a)));
    }
  });
  constexpr float tiny = std::numeric_limits<float>::denorm_min();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    const float v = std::max(static_cast<float>(scores[k]), tiny);
    m.values(a, b) = v;
    m.values(b, a) = v;
  }
  return m;
}

std::vector<fs::path> save_matrix(const fs::path& dir, const SimilarityMatrix& m) {
  m.validate();
  fs::create_directories(dir);
  const fs::path bin = dir / "values.bin";
  io::write_f32(bin, m.values.flat());
  io::json doc{{"format_version", io::kFormatVersion},
               {"kind", "similarity_matrix"},
               {"method", m.method},
               {"num_relations", m.size()},
               {"sample_count", m.sample_count},
               {"seed", m.seed},
               {"source", m.source},
               {"relation_names", m.relation_names},
               {"files", io::json::array({io::file_record(dir, bin)})}};
  io::write_json(dir / "manifest.json", doc);
  return {dir / "manifest.json", bin};
}

SimilarityMatrix load_matrix(const fs::path& dir) {
  const auto doc = io::read_json(dir / "manifest.json");
  io::check_format_version(doc, dir.string());
  if (doc.value("kind", "") != "similarity_matrix") fail(Errc::parse, dir.string() + ": not a similarity matrix");
  SimilarityMatrix m;
  try {
    const std::size_t R = doc.at("num_relations");
    m.values = Matrix<float>(R, R);
    const auto v = io::read_f32(dir / "values.bin", R * R);
    std::copy(v.begin(), v.end(), m.values.data());
    m.sample_count = doc.at("sample_count");
    m.seed = doc.at("seed");
    m.source = doc.at("source");
    m.method = doc.value("method", "factdist");
    m.relation_names = doc.at("relation_names").get<std::vector<std::string>>();
  } catch (const io::json::exception& e) {
    fail(Errc::parse, dir.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

std::string matrix_to_csv(const SimilarityMatrix& m) {
  std::ostringstream out;
  out << "r1_name,r2_name,score\n";
  auto name = [&](std::size_t i) { return m.relation_names.empty() ? std::to_string(i) : m.relation_names[i]; };
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i; j < m.size(); ++j)
      out << io::csv_field(name(i)) << ',' << io::csv_field(name(j)) << ',' << io::format_number(m.values(i, j))
          << '\n';
  return out.str();
}

SimilarityMatrix matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse, "similarity CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "r1_name,r2_name,score") fail(Errc::parse, "similarity CSV header must be r1_name,r2_name,score");
  struct Row {
    std::string a, b;
    float v;
  };
  std::vector<Row> rows;
  std::vector<std::string> names;
  auto index_of = [&](const std::string& n) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
    names.push_back(n);
    return names.size() - 1;
  };
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = io::split_csv_line(line);
    if (f.size() != 3) fail(Errc::parse, "similarity CSV line " + std::to_string(lineno) + ": expected 3 fields");
    float v = 0.0f;
    try {
      v = std::stof(f[2]);
    } catch (const std::exception&) {
      fail(Errc::parse, "similarity CSV line " + std::to_string(lineno) + ": bad score");
    }
    index_of(f[0]);
    index_of(f[1]);
    rows.push_back({f[0], f[1], v});
  }
  SimilarityMatrix m;
  m.relation_names = names;
  m.values = Matrix<float>(names.size(), names.size(), std::numeric_limits<float>::quiet_NaN());
  for (const auto& r : rows) {
    const auto i = index_of(r.a), j = index_of(r.b);
    m.values(i, j) = r.v;
    m.values(j, i) = r.v;
  }
  for (float v : m.values.flat())
    if (std::isnan(v)) fail(Errc::parse, "similarity CSV does not cover every pair");
  bool unit = true;
  for (std::size_t i = 0; i < m.size(); ++i) unit = unit && m.values(i, i) == 1.0f;
  for (float v : m.values.flat()) unit = unit && v > 0.0f && v <= 1.0f;
  m.method = unit ? "factdist" : "baseline";
  return m;
}

}  // namespace relsim::similarity
