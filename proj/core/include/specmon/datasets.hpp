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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specmon/features.hpp"
#include "specmon/labels.hpp"

namespace specmon {

// A labeled complex-baseband capture. Samples are held at their native rate.
struct IQRecording {
  std::vector<std::complex<float>> samples;
  double sample_rate_hz = 0.0;
  double center_frequency_hz = 0.0;
  Protocol protocol = Protocol::kLte4G;
  Transmitter transmitter = Transmitter::kBes;
  std::string day;
  std::string capture_id;
  // Sidecar keys outside the required set, carried through unchanged.
  nlohmann::json extra = nlohmann::json::object();
};

using RecordingPtr = std::shared_ptr<const IQRecording>;

// Reads interleaved little-endian float32 I,Q pairs plus a JSON sidecar with
// center_frequency_hz, sample_rate_hz, protocol, transmitter, day and
// capture_id.
IQRecording ingest_recording(const std::filesystem::path& data_path,
                             const std::filesystem::path& metadata_path);

void write_recording(const IQRecording& recording,
                     const std::filesystem::path& data_path,
                     const std::filesystem::path& metadata_path);

nlohmann::json recording_metadata(const IQRecording& recording);

// Every `*.iq` under `dir` (recursively) with its `*.json` sidecar, ordered by
// relative path. Capture ids must be unique.
std::vector<RecordingPtr> load_corpus(const std::filesystem::path& dir);

// Writes sidecars for a `<transmitter>/<protocol>/<day>/*.iq` directory tree.
// Protocol directories may use "4G"/"lte", "5G"/"5g_nr"/"nr", or
// "802.11a"/"wifi". Existing sidecars are left alone. Returns the number of
// sidecars written.
std::size_t import_directory_layout(const std::filesystem::path& root);

// One example: a kWindowLength slice of a recording plus its labels. The
// channel tensor is materialized on demand from the source samples.
struct LabeledWindow {
  RecordingPtr source;
  std::size_t offset = 0;
  Protocol protocol = Protocol::kLte4G;
  Transmitter transmitter = Transmitter::kBes;

  const std::string& capture_id() const { return source->capture_id; }
  std::size_t label(TaskKind task) const {
    return encode_label(protocol, transmitter, task);
  }
  IQWindow iq() const {
    return std::span(source->samples).subspan(offset, kWindowLength);
  }
  ChannelizedWindow channels(NormalizePolicy policy = NormalizePolicy::kNone) const {
    return normalize_window(iq_to_channels(iq()), policy);
  }
};

// Per-class window counts for `total` windows: equal shares, with the
// remainder going one each to the lowest class indices.
std::vector<std::size_t> class_quota(std::size_t total, std::size_t classes);

// Draws class_quota(total) windows per class. For each window a recording of
// that class is chosen uniformly, then a start offset uniformly over its valid
// range. Output is grouped by class index. CoverageError names any class with
// no recordings.
std::vector<LabeledWindow> sample_windows(std::span<const RecordingPtr> recordings,
                                          std::size_t total, TaskKind task,
                                          std::uint64_t seed);

enum class SplitPolicy { kRandom, kByOffset };

std::string_view split_policy_name(SplitPolicy policy);
SplitPolicy parse_split_policy(std::string_view name);

struct SplitSizes {
  std::size_t train = 38000;
  std::size_t val = 2000;
  std::size_t test = 10000;

  std::size_t total() const { return train + val + test; }
};

struct DatasetSplit {
  std::vector<LabeledWindow> train;
  std::vector<LabeledWindow> val;
  std::vector<LabeledWindow> test;
  std::uint64_t seed = 0;
  SplitPolicy policy = SplitPolicy::kRandom;
};

// kRandom: seeded shuffle, then consecutive partition.
// kByOffset: same membership, but every window is re-drawn inside the third
// of its recording reserved for its split (train first, val middle, test
// last), so no test window overlaps a train window's samples.
DatasetSplit split_dataset(std::vector<LabeledWindow> windows, SplitSizes sizes,
                           std::uint64_t seed, SplitPolicy policy);

// Split manifest: per-window (capture_id, offset, labels) for every split,
// plus seed, policy, task and normalization.
struct DatasetManifest {
  DatasetSplit split;
  TaskKind task = TaskKind::kProtocol;
  NormalizePolicy normalize = NormalizePolicy::kNone;
};

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);
// Resolves capture ids against `recordings`; an unknown id is a FormatError.
DatasetManifest read_manifest(const std::filesystem::path& path,
                              std::span<const RecordingPtr> recordings);

}  // namespace specmon
