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

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/similarity.hpp"

namespace relsim::similarity {

namespace fs = std::filesystem;

BaselineKind parse_baseline_kind(const std::string& name) {
  if (name == "transe") return BaselineKind::transe;
  if (name == "distmult") return BaselineKind::distmult;
  if (name == "rescal") return BaselineKind::rescal;
  if (name == "rotate") return BaselineKind::rotate;
  fail(Errc::config, "unknown baseline kind: " + name);
}

std::string baseline_kind_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::transe: return "transe";
    case BaselineKind::distmult: return "distmult";
    case BaselineKind::rescal: return "rescal";
    case BaselineKind::rotate: return "rotate";
  }
  return "unknown";
}

void BaselineEmbeddings::validate() const {
  const std::size_t width = kind == BaselineKind::rescal ? dim * dim : dim;
  require(dim > 0 && payload.cols() == width, Errc::contract, "baseline payload width inconsistent with kind");
  require(relation_names.empty() || relation_names.size() == payload.rows(), Errc::contract,
          "baseline names do not match payload rows");
  for (float v : payload.flat()) require(std::isfinite(v), Errc::contract, "non-finite baseline value");
  if (kind == BaselineKind::rotate) {
    for (float v : payload.flat())
      require(v >= 0.0f && static_cast<double>(v) < 2.0 * std::numbers::pi, Errc::contract,
              "rotate phases must lie in [0, 2pi)");
  }
}

double baseline_similarity(const BaselineEmbeddings& emb, RelationId r1, RelationId r2) {
  require(r1 < emb.payload.rows() && r2 < emb.payload.rows(), Errc::index, "baseline relation id out of range");
  const auto a = emb.payload.row(r1);
  const auto b = emb.payload.row(r2);
  switch (emb.kind) {
    case BaselineKind::transe:
    case BaselineKind::distmult: {
      double ab = 0.0, aa = 0.0, bb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ab += static_cast<double>(a[i]) * b[i];
        aa += static_cast<double>(a[i]) * a[i];
        bb += static_cast<double>(b[i]) * b[i];
      }
      if (aa == 0.0 || bb == 0.0) fail(Errc::degenerate_input, "cosine similarity of a zero-norm relation vector");
      return std::exp(ab / (std::sqrt(aa) * std::sqrt(bb)));
    }
    case BaselineKind::rescal: {
      double fro = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        fro += d * d;
      }
      return std::exp(-std::sqrt(fro));
    }
    case BaselineKind::rotate: {
      double dist = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(static_cast<double>(a[i]) - b[i]);
        dist += std::min(d, 2.0 * std::numbers::pi - d);
      }
      return std::exp(-dist);
    }
  }
  return 0.0;
}

SimilarityMatrix baseline_matrix(const BaselineEmbeddings& emb, std::string source) {
  emb.validate();
  const std::size_t R = emb.payload.rows();
  SimilarityMatrix m;
  m.values = Matrix<float>(R, R);
  m.method = baseline_kind_name(emb.kind);
  m.source = std::move(source);
  m.relation_names = emb.relation_names;
  for (RelationId i = 0; i < R; ++i) {
    for (RelationId j = i; j < R; ++j) {
      const auto v = static_cast<float>(baseline_similarity(emb, i, j));
      m.values(i, j) = v;
      m.values(j, i) = v;
    }
  }
  return m;
}

BaselineEmbeddings load_baseline(const fs::path& dir) {
  const auto doc = io::read_json(dir / "manifest.json");
  io::check_format_version(doc, dir.string());
  const std::string kind = doc.value("kind", "");
  BaselineEmbeddings emb;
  try {
    const std::size_t R = doc.at("num_relations");
    if (kind == "kge") {
      emb.kind = parse_baseline_kind(doc.at("model").get<std::string>());
      emb.dim = doc.at("embedding_dim");
    } else if (kind == "baseline") {
      emb.kind = parse_baseline_kind(doc.at("method").get<std::string>());
      emb.dim = doc.at("dim");
    } else {
      fail(Errc::parse, dir.string() + ": not a baseline or kge checkpoint");
    }
    const std::size_t width = emb.kind == BaselineKind::rescal ? emb.dim * emb.dim : emb.dim;
    emb.payload = Matrix<float>(R, width);
    const auto v = io::read_f32(dir / "relation_emb.bin", R * width);
    std::copy(v.begin(), v.end(), emb.payload.data());
    emb.relation_names = doc.value("relation_names", std::vector<std::string>{});
  } catch (const io::json::exception& e) {
    fail(Errc::parse, dir.string() + ": " + e.what());
  }
  emb.validate();
  return emb;
}

void save_baseline(const fs::path& dir, const BaselineEmbeddings& emb) {
  emb.validate();
  fs::create_directories(dir);
  io::write_f32(dir / "relation_emb.bin", emb.payload.flat());
  io::write_json(dir / "manifest.json", {{"format_version", io::kFormatVersion},
                                         {"kind", "baseline"},
                                         {"method", baseline_kind_name(emb.kind)},
                                         {"num_relations", emb.payload.rows()},
                                         {"dim", emb.dim},
                                         {"relation_names", emb.relation_names},
                                         {"files", io::json::array({io::file_record(dir, dir / "relation_emb.bin")})}});
}

}  // namespace relsim::similarity
