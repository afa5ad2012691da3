// Copyright 2026 The specmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

namespace specmon {

// Whole-file read; IoError names the path on failure.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, creating
// parent directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::uint32_t crc32(std::span<const std::byte> bytes);
std::uint32_t crc32(std::string_view bytes);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace specmon
