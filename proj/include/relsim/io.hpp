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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace relsim::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Major.minor written into every manifest; loaders reject other majors.
inline constexpr const char* kFormatVersion = "1.0";
void check_format_version(const json& manifest, std::string_view what);

// Little-endian 32-bit blobs, row-major.
void write_f32(const fs::path& path, std::span<const float> values);
std::vector<float> read_f32(const fs::path& path, std::size_t expected_count);
void write_u32(const fs::path& path, std::span<const std::uint32_t> values);
std::vector<std::uint32_t> read_u32(const fs::path& path, std::size_t expected_count);

void write_json(const fs::path& path, const json& doc);
json read_json(const fs::path& path);

void write_text(const fs::path& path, std::string_view text);
std::string read_text(const fs::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

// {"name", "bytes", "sha256"} for a file, name relative to `root`.
json file_record(const fs::path& root, const fs::path& file);

// Shortest decimal text that parses back to the same value.
std::string format_number(double v);
std::string format_number(float v);

std::string csv_field(std::string_view s);
std::vector<std::string> split_csv_line(std::string_view line);
std::vector<std::string> split_tabs(std::string_view line);

}  // namespace relsim::io
