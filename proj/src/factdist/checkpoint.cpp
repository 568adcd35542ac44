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

#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/io.hpp"

namespace relsim::factdist {

namespace fs = std::filesystem;

void save_checkpoint(const fs::path& dir, const Params<float>& params, const CheckpointInfo& info) {
  params.validate();
  fs::create_directories(dir);
  const auto ts = params.tensors();
  io::json tensors = io::json::array();
  io::json files = io::json::array();
  const std::array<std::pair<std::size_t, std::size_t>, 10> shapes = {{
      {params.entity_emb.rows(), params.entity_emb.cols()},
      {params.relation_emb.rows(), params.relation_emb.cols()},
      {params.head_net.w1.rows(), params.head_net.w1.cols()},
      {params.head_net.b1.size(), 1},
      {params.head_net.w2.rows(), params.head_net.w2.cols()},
      {params.head_net.b2.size(), 1},
      {params.tail_net.w1.rows(), params.tail_net.w1.cols()},
      {params.tail_net.b1.size(), 1},
      {params.tail_net.w2.rows(), params.tail_net.w2.cols()},
      {params.tail_net.b2.size(), 1},
  }};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const fs::path file = dir / (std::string(kTensorNames[i]) + ".bin");
    io::write_f32(file, ts[i]);
    tensors.push_back({{"name", kTensorNames[i]}, {"rows", shapes[i].first}, {"cols", shapes[i].second}});
    files.push_back(io::file_record(dir, file));
  }
  io::json doc{{"format_version", io::kFormatVersion},
               {"kind", "factdist"},
               {"num_entities", params.num_entities()},
               {"num_relations", params.num_relations()},
               {"embedding_dim", params.dim()},
               {"hidden_dim", params.hidden_dim()},
               {"config", info.config.to_json()},
               {"entity_names", info.entity_names},
               {"relation_names", info.relation_names},
               {"tensors", tensors},
               {"files", files}};
  io::write_json(dir / "manifest.json", doc);
}

Params<float> load_checkpoint(const fs::path& dir, CheckpointInfo* info) {
  const auto doc = io::read_json(dir / "manifest.json");
  io::check_format_version(doc, dir.string());
  if (doc.value("kind", "") != "factdist") fail(Errc::parse, dir.string() + ": not a factdist checkpoint");
  try {
    const std::size_t e = doc.at("num_entities"), r = doc.at("num_relations");
    const std::size_t d = doc.at("embedding_dim"), h = doc.at("hidden_dim");
    auto p = zero_params<float>(e, r, d, h);
    auto ts = p.tensors();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto values = io::read_f32(dir / (std::string(kTensorNames[i]) + ".bin"), ts[i].size());
      std::copy(values.begin(), values.end(), ts[i].begin());
    }
    p.validate();
    if (info) {
      info->config = TrainConfig::from_json(doc.at("config"));
      info->entity_names = doc.value("entity_names", std::vector<std::string>{});
      info->relation_names = doc.value("relation_names", std::vector<std::string>{});
    }
    return p;
  } catch (const io::json::exception& ex) {
    fail(Errc::parse, dir.string() + ": " + ex.what());
  }
}

}  // namespace relsim::factdist
