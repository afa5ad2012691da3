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

#include "specmon/datasets.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "specmon/error.hpp"
#include "specmon/io.hpp"

namespace specmon {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<const char*, 6> kRequiredKeys = {
    "center_frequency_hz", "sample_rate_hz", "protocol",
    "transmitter",         "day",            "capture_id"};

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) |
           (v >> 24);
  }
}

template <typename Value>
Value required(const json& meta, const char* key, const fs::path& path) {
  if (!meta.contains(key)) {
    throw FormatError(path.string() + ": sidecar is missing required key '" +
                      key + "'");
  }
  try {
    return meta.at(key).get<Value>();
  } catch (const json::exception&) {
    throw FormatError(path.string() + ": sidecar key '" + key +
                      "' has the wrong type");
  }
}

// Offset range [lo, hi] for a window confined to `third` of the recording.
std::pair<std::size_t, std::size_t> third_range(std::size_t length,
                                                std::size_t third,
                                                const std::string& capture_id) {
  const std::size_t lo = third * length / 3;
  const std::size_t end = (third + 1) * length / 3;
  if (end - lo < kWindowLength) {
    throw ConfigError("recording " + capture_id + " is too short (" +
                      std::to_string(length) +
                      " samples) for the by_offset split policy");
  }
  return {lo, end - kWindowLength};
}

}  // namespace

nlohmann::json recording_metadata(const IQRecording& recording) {
  json meta = recording.extra.is_object() ? recording.extra : json::object();
  meta["center_frequency_hz"] = recording.center_frequency_hz;
  meta["sample_rate_hz"] = recording.sample_rate_hz;
  meta["protocol"] = std::string(protocol_name(recording.protocol));
  meta["transmitter"] = std::string(transmitter_name(recording.transmitter));
  meta["day"] = recording.day;
  meta["capture_id"] = recording.capture_id;
  return meta;
}

IQRecording ingest_recording(const fs::path& data_path,
                             const fs::path& metadata_path) {
  json meta;
  try {
    meta = json::parse(read_file(metadata_path));
  } catch (const json::parse_error& e) {
    throw FormatError(metadata_path.string() + ": invalid JSON: " + e.what());
  }
  if (!meta.is_object()) {
    throw FormatError(metadata_path.string() + ": sidecar must be a JSON object");
  }
  IQRecording rec;
  rec.center_frequency_hz = required<double>(meta, "center_frequency_hz", metadata_path);
  rec.sample_rate_hz = required<double>(meta, "sample_rate_hz", metadata_path);
  rec.protocol = parse_protocol(required<std::string>(meta, "protocol", metadata_path));
  rec.transmitter =
      parse_transmitter(required<std::string>(meta, "transmitter", metadata_path));
  rec.day = required<std::string>(meta, "day", metadata_path);
  rec.capture_id = required<std::string>(meta, "capture_id", metadata_path);
  if (!(rec.sample_rate_hz > 0.0)) {
    throw FormatError(metadata_path.string() + ": sample_rate_hz must be positive");
  }
  for (const char* key : kRequiredKeys) meta.erase(key);
  rec.extra = std::move(meta);

  const std::string bytes = read_file(data_path);
  if (bytes.size() % sizeof(float) != 0 || (bytes.size() / sizeof(float)) % 2 != 0) {
    throw FormatError(data_path.string() + ": " + std::to_string(bytes.size()) +
                      " bytes is not a whole number of float32 I,Q pairs");
  }
  const std::size_t count = bytes.size() / (2 * sizeof(float));
  if (count < kWindowLength) {
    throw FormatError(data_path.string() + ": " + std::to_string(count) +
                      " samples is shorter than one window");
  }
  rec.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t re, im;
    std::memcpy(&re, bytes.data() + 8 * i, 4);
    std::memcpy(&im, bytes.data() + 8 * i + 4, 4);
    rec.samples[i] = {std::bit_cast<float>(to_little_endian(re)),
                      std::bit_cast<float>(to_little_endian(im))};
  }
  return rec;
}

void write_recording(const IQRecording& recording, const fs::path& data_path,
                     const fs::path& metadata_path) {
  std::string bytes(recording.samples.size() * 8, '\0');
  for (std::size_t i = 0; i < recording.samples.size(); ++i) {
    const std::uint32_t re =
        to_little_endian(std::bit_cast<std::uint32_t>(recording.samples[i].real()));
    const std::uint32_t im =
        to_little_endian(std::bit_cast<std::uint32_t>(recording.samples[i].imag()));
    std::memcpy(bytes.data() + 8 * i, &re, 4);
    std::memcpy(bytes.data() + 8 * i + 4, &im, 4);
  }
  write_file_atomic(data_path, bytes);
  write_file_atomic(metadata_path, recording_metadata(recording).dump(2) + "\n");
}

std::vector<RecordingPtr> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("data directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".iq") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) {
    return a.lexically_relative(dir).generic_string() <
           b.lexically_relative(dir).generic_string();
  });
  std::vector<RecordingPtr> out;
  std::set<std::string> ids;
  for (const auto& data : files) {
    fs::path meta = data;
    meta.replace_extension(".json");
    if (!fs::exists(meta)) {
      throw FormatError(data.string() + ": no metadata sidecar " + meta.string());
    }
    auto rec = std::make_shared<IQRecording>(ingest_recording(data, meta));
    if (!ids.insert(rec->capture_id).second) {
      throw FormatError(meta.string() + ": duplicate capture_id '" +
                        rec->capture_id + "'");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::size_t import_directory_layout(const fs::path& root) {
  static const std::map<std::string, Protocol> kProtocolDirs = {
      {"4G", Protocol::kLte4G},       {"lte", Protocol::kLte4G},
      {"5G", Protocol::kNr5G},        {"5G NR", Protocol::kNr5G},
      {"5g_nr", Protocol::kNr5G},     {"nr", Protocol::kNr5G},
      {"802.11a", Protocol::kWifi80211a}, {"wifi", Protocol::kWifi80211a}};
  if (!fs::is_directory(root)) {
    throw IoError("import root " + root.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".iq") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::size_t written = 0;
  for (const auto& data : files) {
    const fs::path rel = data.lexically_relative(root);
    std::vector<std::string> parts;
    for (const auto& p : rel) parts.push_back(p.string());
    if (parts.size() != 4) {
      throw FormatError(rel.string() +
                        ": expected <transmitter>/<protocol>/<day>/<file>.iq");
    }
    const Transmitter tx = parse_transmitter(parts[0]);
    const auto proto = kProtocolDirs.find(parts[1]);
    if (proto == kProtocolDirs.end()) {
      throw VocabularyError("unknown protocol directory '" + parts[1] + "' in " +
                            rel.string());
    }
    fs::path meta = data;
    meta.replace_extension(".json");
    if (fs::exists(meta)) continue;
    json sidecar = {
        {"center_frequency_hz", 2.685e9},
        {"sample_rate_hz", proto->second == Protocol::kWifi80211a ? 5e6 : 7.68e6},
        {"protocol", std::string(protocol_name(proto->second))},
        {"transmitter", std::string(transmitter_name(tx))},
        {"day", parts[2]},
        {"capture_id", parts[0] + "_" + parts[1] + "_" + parts[2] + "_" +
                           data.stem().string()},
    };
    write_file_atomic(meta, sidecar.dump(2) + "\n");
    ++written;
  }
  return written;
}

std::vector<std::size_t> class_quota(std::size_t total, std::size_t classes) {
  std::vector<std::size_t> quota(classes, total / classes);
  for (std::size_t c = 0; c < total % classes; ++c) ++quota[c];
  return quota;
}

std::vector<LabeledWindow> sample_windows(std::span<const RecordingPtr> recordings,
                                          std::size_t total, TaskKind task,
                                          std::uint64_t seed) {
  const std::size_t classes = class_count(task);
  const std::vector<std::string> names = class_names(task);
  std::vector<std::vector<RecordingPtr>> by_class(classes);
  for (const auto& rec : recordings) {
    by_class[encode_label(rec->protocol, rec->transmitter, task)].push_back(rec);
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (by_class[c].empty()) {
      throw CoverageError("no recordings for class '" + names[c] + "' in the " +
                          std::string(task_name(task)) + " task");
    }
  }
  const std::vector<std::size_t> quota = class_quota(total, classes);
  std::mt19937_64 rng(seed);
  std::vector<LabeledWindow> out;
  out.reserve(total);
  for (std::size_t c = 0; c < classes; ++c) {
    std::uniform_int_distribution<std::size_t> pick(0, by_class[c].size() - 1);
    for (std::size_t i = 0; i < quota[c]; ++i) {
      const RecordingPtr& rec = by_class[c][pick(rng)];
      std::uniform_int_distribution<std::size_t> start(
          0, rec->samples.size() - kWindowLength);
      out.push_back({rec, start(rng), rec->protocol, rec->transmitter});
    }
  }
  return out;
}

std::string_view split_policy_name(SplitPolicy policy) {
  return policy == SplitPolicy::kByOffset ? "by_offset" : "random";
}

SplitPolicy parse_split_policy(std::string_view name) {
  if (name == "random") return SplitPolicy::kRandom;
  if (name == "by_offset") return SplitPolicy::kByOffset;
  throw ConfigError("unknown split policy '" + std::string(name) +
                    "' (expected random or by_offset)");
}

DatasetSplit split_dataset(std::vector<LabeledWindow> windows, SplitSizes sizes,
                           std::uint64_t seed, SplitPolicy policy) {
  if (sizes.total() != windows.size()) {
    throw ConfigError("split sizes " + std::to_string(sizes.train) + "/" +
                      std::to_string(sizes.val) + "/" + std::to_string(sizes.test) +
                      " sum to " + std::to_string(sizes.total()) + ", but " +
                      std::to_string(windows.size()) + " windows were sampled");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  DatasetSplit split;
  split.seed = seed;
  split.policy = policy;
  split.train.reserve(sizes.train);
  split.val.reserve(sizes.val);
  split.test.reserve(sizes.test);
  for (std::size_t i = 0; i < order.size(); ++i) {
    LabeledWindow& w = windows[order[i]];
    std::vector<LabeledWindow>* target = &split.test;
    std::size_t third = 2;
    if (i < sizes.train) {
      target = &split.train;
      third = 0;
    } else if (i < sizes.train + sizes.val) {
      target = &split.val;
      third = 1;
    }
    if (policy == SplitPolicy::kByOffset) {
      auto [lo, hi] = third_range(w.source->samples.size(), third, w.capture_id());
      w.offset = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    }
    target->push_back(std::move(w));
  }
  return split;
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
  auto list = [](const std::vector<LabeledWindow>& windows) {
    json arr = json::array();
    for (const auto& w : windows) {
      arr.push_back({{"capture_id", w.capture_id()},
                     {"offset", w.offset},
                     {"protocol", std::string(protocol_name(w.protocol))},
                     {"transmitter", std::string(transmitter_name(w.transmitter))}});
    }
    return arr;
  };
  return {
      {"format", "specmon-dataset-manifest"},
      {"version", 1},
      {"task", std::string(task_name(manifest.task))},
      {"normalize", std::string(normalize_policy_name(manifest.normalize))},
      {"seed", manifest.split.seed},
      {"policy", std::string(split_policy_name(manifest.split.policy))},
      {"window_length", kWindowLength},
      {"train", list(manifest.split.train)},
      {"val", list(manifest.split.val)},
      {"test", list(manifest.split.test)},
  };
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_file_atomic(path, manifest_to_json(manifest).dump(1) + "\n");
}

DatasetManifest read_manifest(const fs::path& path,
                              std::span<const RecordingPtr> recordings) {
  std::map<std::string, RecordingPtr> by_id;
  for (const auto& rec : recordings) by_id[rec->capture_id] = rec;
  DatasetManifest manifest;
  try {
    const json doc = json::parse(read_file(path));
    if (doc.value("format", "") != "specmon-dataset-manifest") {
      throw FormatError(path.string() + " is not a dataset manifest");
    }
    manifest.task = parse_task(doc.at("task").get<std::string>());
    manifest.normalize = parse_normalize_policy(doc.at("normalize").get<std::string>());
    manifest.split.seed = doc.at("seed").get<std::uint64_t>();
    manifest.split.policy = parse_split_policy(doc.at("policy").get<std::string>());
    auto load = [&](const char* key, std::vector<LabeledWindow>& out) {
      for (const auto& item : doc.at(key)) {
        const auto id = item.at("capture_id").get<std::string>();
        auto it = by_id.find(id);
        if (it == by_id.end()) {
          throw FormatError(path.string() + ": unknown capture_id '" + id + "'");
        }
        LabeledWindow w{it->second, item.at("offset").get<std::size_t>(),
                        parse_protocol(item.at("protocol").get<std::string>()),
                        parse_transmitter(item.at("transmitter").get<std::string>())};
        if (w.offset + kWindowLength > w.source->samples.size()) {
          throw FormatError(path.string() + ": window at offset " +
                            std::to_string(w.offset) + " runs past the end of " + id);
        }
        out.push_back(std::move(w));
      }
    };
    load("train", manifest.split.train);
    load("val", manifest.split.val);
    load("test", manifest.split.test);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed manifest: " + e.what());
  }
  return manifest;
}

}  // namespace specmon
