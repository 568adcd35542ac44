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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "relsim/factdist.hpp"
#include "relsim/kb_core.hpp"
#include "relsim/kge.hpp"
#include "relsim/margin.hpp"
#include "relsim/redundancy.hpp"

namespace relsim::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "relsim 0.1.0";

enum class Stage { data, factdist, sim, kge, redun, analyze, margin };
Stage parse_stage(const std::string& s);
std::string stage_name(Stage s);
// Comma-separated list, returned in pipeline order without duplicates.
std::vector<Stage> parse_stages(const std::string& list);
std::vector<Stage> all_stages();

struct DataBlock {
  fs::path path;
  kb::TripleFormat format = kb::TripleFormat::tsv;
  kb::LoadOptions load;
  double valid_fraction = 0.1;
  std::optional<kb::CrpConfig> crp;
};

struct SimBlock {
  std::size_t samples = similarity::kDefaultSamples;
};

struct KgeBlock {
  kge::KgeConfig config;
  double temperature_init = 8192.0;
  std::size_t halve_every = 200;
  double temperature_floor = 16.0;
  std::optional<fs::path> types_file;
  kge::TypedSamplerConfig typed;  // schedules; type_of filled at run time
};

struct RedunBlock {
  double lambda = 0.5;
  redundancy::SampleRequest sample;
  std::optional<fs::path> labels;
  std::vector<double> pr_thresholds;
  std::size_t bootstrap = 1000;
};

struct AnalyzeBlock {
  std::optional<fs::path> annotations;
  std::size_t shuffles = 10000;
};

struct MarginBlock {
  margin::ToyConfig config;
  std::string features = "kge";  // kge | factdist
};

struct RunConfig {
  std::uint64_t seed = 0;
  fs::path run_dir;
  DataBlock data;
  factdist::TrainConfig factdist;
  SimBlock sim;
  KgeBlock kge;
  RedunBlock redun;
  AnalyzeBlock analyze;
  MarginBlock margin;

  // Paths are resolved against base_dir. Errors name the offending field.
  static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir);
  nlohmann::json to_json() const;
  // Checks the paths the given stages read.
  void validate(const std::vector<Stage>& stages) const;
  std::string hash() const;
};

// Reads a config file; RELSIM_SEED overrides the seed when set.
RunConfig load_run_config(const fs::path& path);

struct RunResult {
  fs::path run_dir;
  std::string config_hash;
  std::vector<fs::path> files;  // relative to run_dir
};

// Runs the stages in order under config.run_dir and writes manifest.json.
RunResult run_pipeline(const RunConfig& config, const std::vector<Stage>& stages);

enum class ReportFormat { csv, json };
ReportFormat parse_report_format(const std::string& s);

// Documented CSV/JSON rendering of a similarity matrix directory, PR curve,
// rank histogram or ranking report.
std::string export_report(const fs::path& artifact, ReportFormat format);

}  // namespace relsim::pipeline
