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

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace specmon {

enum class Protocol { kLte4G, kNr5G, kWifi80211a };
enum class Transmitter { kBes, kBrowning, kHonors, kMeb };
enum class TaskKind { kProtocol, kTransmitter, kJoint };

inline constexpr std::array<Protocol, 3> kProtocols = {
    Protocol::kLte4G, Protocol::kNr5G, Protocol::kWifi80211a};
inline constexpr std::array<Transmitter, 4> kTransmitters = {
    Transmitter::kBes, Transmitter::kBrowning, Transmitter::kHonors,
    Transmitter::kMeb};

// "4G", "5G NR", "802.11a"
std::string_view protocol_name(Protocol p);
// "bes", "browning", "honors", "meb"
std::string_view transmitter_name(Transmitter t);
// "protocol", "transmitter", "joint"
std::string_view task_name(TaskKind task);

// Closed vocabularies: anything else is a VocabularyError.
Protocol parse_protocol(std::string_view name);
Transmitter parse_transmitter(std::string_view name);
// Unknown names are a ConfigError listing the valid choices.
TaskKind parse_task(std::string_view name);

std::size_t class_count(TaskKind task);

// Ordered class names; joint classes are "transmitter_protocol", transmitter
// major ("bes_4G", "bes_5G NR", "bes_802.11a", "browning_4G", ...).
std::vector<std::string> class_names(TaskKind task);

// Joint index = transmitter_index * 3 + protocol_index.
std::size_t encode_label(Protocol p, Transmitter t, TaskKind task);

}  // namespace specmon
