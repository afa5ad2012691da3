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

#include "specmon/labels.hpp"

#include "specmon/error.hpp"

namespace specmon {

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kLte4G: return "4G";
    case Protocol::kNr5G: return "5G NR";
    case Protocol::kWifi80211a: return "802.11a";
  }
  return "?";
}

std::string_view transmitter_name(Transmitter t) {
  switch (t) {
    case Transmitter::kBes: return "bes";
    case Transmitter::kBrowning: return "browning";
    case Transmitter::kHonors: return "honors";
    case Transmitter::kMeb: return "meb";
  }
  return "?";
}

std::string_view task_name(TaskKind task) {
  switch (task) {
    case TaskKind::kProtocol: return "protocol";
    case TaskKind::kTransmitter: return "transmitter";
    case TaskKind::kJoint: return "joint";
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  for (Protocol p : kProtocols) {
    if (protocol_name(p) == name) return p;
  }
  throw VocabularyError("unknown protocol '" + std::string(name) +
                        "' (expected 4G, 5G NR or 802.11a)");
}

Transmitter parse_transmitter(std::string_view name) {
  for (Transmitter t : kTransmitters) {
    if (transmitter_name(t) == name) return t;
  }
  throw VocabularyError("unknown transmitter '" + std::string(name) +
                        "' (expected bes, browning, honors or meb)");
}

TaskKind parse_task(std::string_view name) {
  for (TaskKind t : {TaskKind::kProtocol, TaskKind::kTransmitter, TaskKind::kJoint}) {
    if (task_name(t) == name) return t;
  }
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected one of {protocol, transmitter, joint})");
}

std::size_t class_count(TaskKind task) {
  switch (task) {
    case TaskKind::kProtocol: return kProtocols.size();
    case TaskKind::kTransmitter: return kTransmitters.size();
    case TaskKind::kJoint: return kProtocols.size() * kTransmitters.size();
  }
  return 0;
}

std::vector<std::string> class_names(TaskKind task) {
  std::vector<std::string> names;
  switch (task) {
    case TaskKind::kProtocol:
      for (Protocol p : kProtocols) names.emplace_back(protocol_name(p));
      break;
    case TaskKind::kTransmitter:
      for (Transmitter t : kTransmitters) names.emplace_back(transmitter_name(t));
      break;
    case TaskKind::kJoint:
      for (Transmitter t : kTransmitters) {
        for (Protocol p : kProtocols) {
          names.push_back(std::string(transmitter_name(t)) + "_" +
                          std::string(protocol_name(p)));
        }
      }
      break;
  }
  return names;
}

std::size_t encode_label(Protocol p, Transmitter t, TaskKind task) {
  const auto pi = static_cast<std::size_t>(p);
  const auto ti = static_cast<std::size_t>(t);
  switch (task) {
    case TaskKind::kProtocol: return pi;
    case TaskKind::kTransmitter: return ti;
    case TaskKind::kJoint: return ti * kProtocols.size() + pi;
  }
  return 0;
}

}  // namespace specmon
