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
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "specmon/classifier.hpp"

namespace specmon {

// Checkpoint layout, all integers little-endian:
//   "SPMC" | u16 version | u32 header length | JSON header |
//   float32 payload | u32 crc32 of the payload
// The payload holds every trainable tensor in declared layer order followed by
// the batchnorm running statistics (bn1.running_mean, bn1.running_var, ...).
inline constexpr std::string_view kCheckpointMagic = "SPMC";
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const CnnModel& model);
CnnModel deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_checkpoint(const std::filesystem::path& path);

// The JSON header alone, for inspection.
nlohmann::json checkpoint_header(const CnnModel& model);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc);
nlohmann::json data_config_to_json(const DataConfig& cfg);
DataConfig data_config_from_json(const nlohmann::json& doc);

}  // namespace specmon
