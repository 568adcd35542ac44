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

#include "relsim/analysis.hpp"
#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/pipeline.hpp"

namespace relsim::pipeline {

ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  fail(Errc::config, "unknown report format: " + s);
}

namespace {

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json matrix_json(const similarity::SimilarityMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<double> row(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return {{"format_version", io::kFormatVersion}, {"kind", "similarity_matrix"}, {"method", m.method},
          {"relation_names", m.relation_names}, {"values", rows}};
}

}  // namespace

std::string export_report(const fs::path& artifact, ReportFormat format) {
  if (!fs::exists(artifact)) fail(Errc::missing_artifact, "no such artifact: " + artifact.string());
  const fs::path doc_path = fs::is_directory(artifact) ? artifact / "manifest.json" : artifact;
  if (!fs::exists(doc_path)) fail(Errc::missing_artifact, "no manifest in " + artifact.string());
  const auto doc = io::read_json(doc_path);
  const std::string kind = doc.is_object() ? doc.value("kind", "") : "";
  if (kind == "similarity_matrix") {
    const auto m = similarity::load_matrix(doc_path.parent_path());
    return format == ReportFormat::csv ? similarity::matrix_to_csv(m) : json_text(matrix_json(m));
  }
  if (kind == "pr_curve") {
    const auto curve = redundancy::pr_from_json(doc);
    return format == ReportFormat::csv ? redundancy::pr_to_csv(curve) : json_text(redundancy::pr_to_json(curve));
  }
  if (kind == "rank_histogram") {
    const auto h = analysis::histogram_from_json(doc);
    return format == ReportFormat::csv ? analysis::histogram_to_csv(h) : json_text(analysis::histogram_to_json(h));
  }
  if (kind == "ranking_report") {
    if (format == ReportFormat::json) return json_text(doc);
    std::string out = "h,r,t,rank\n";
    for (const auto& e : doc.at("entries"))
      out += io::csv_field(e.at("head").get<std::string>()) + ',' + io::csv_field(e.at("relation").get<std::string>()) +
             ',' + io::csv_field(e.at("tail").get<std::string>()) + ',' + std::to_string(e.at("rank").get<std::size_t>()) +
             '\n';
    return out;
  }
  fail(Errc::input, artifact.string() + ": unknown artifact type '" + kind + "'");
}

}  // namespace relsim::pipeline
