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


#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "specmon/datasets.hpp"
#include "specmon/error.hpp"
#include "specmon/io.hpp"

namespace specmon {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("specmon_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RecordingPtr make_recording(Protocol p, Transmitter t, std::size_t n, std::uint64_t seed,
                            const std::string& id) {
  auto rec = std::make_shared<IQRecording>();
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d;
  rec->samples.resize(n);
  for (auto& s : rec->samples) s = {d(rng), d(rng)};
  rec->sample_rate_hz = 7.68e6;
  rec->center_frequency_hz = 2.685e9;
  rec->protocol = p;
  rec->transmitter = t;
  rec->day = "day1";
  rec->capture_id = id;
  return rec;
}

std::vector<RecordingPtr> full_corpus(std::size_t n = 8192) {
  std::vector<RecordingPtr> out;
  std::uint64_t seed = 1;
  for (Transmitter t : kTransmitters)
    for (Protocol p : kProtocols)
      out.push_back(make_recording(p, t, n, seed++,
                                   std::string(transmitter_name(t)) + "_" +
                                       std::to_string(static_cast<int>(p))));
  return out;
}

TEST(Ingest, RoundTripIsExact) {
  const fs::path dir = fresh_dir("ingest_roundtrip");
  auto rec = make_recording(Protocol::kNr5G, Transmitter::kHonors, 3000, 5, "cap1");
  auto copy = *rec;
  copy.extra = {{"note", "kept"}};
  write_recording(copy, dir / "a.iq", dir / "a.json");
  EXPECT_EQ(fs::file_size(dir / "a.iq"), 3000u * 8);
  const IQRecording back = ingest_recording(dir / "a.iq", dir / "a.json");
  EXPECT_EQ(back.samples, rec->samples);
  EXPECT_EQ(back.protocol, Protocol::kNr5G);
  EXPECT_EQ(back.transmitter, Transmitter::kHonors);
  EXPECT_EQ(back.capture_id, "cap1");
  EXPECT_EQ(back.sample_rate_hz, 7.68e6);
  EXPECT_EQ(back.extra.at("note"), "kept");
}

TEST(Ingest, OddFloatCountIsFormatError) {
  const fs::path dir = fresh_dir("ingest_odd");
  auto rec = make_recording(Protocol::kLte4G, Transmitter::kBes, 2048, 1, "c");
  write_recording(*rec, dir / "a.iq", dir / "a.json");
  fs::resize_file(dir / "a.iq", 2048 * 8 - 4);
  EXPECT_THROW(ingest_recording(dir / "a.iq", dir / "a.json"), FormatError);
}

TEST(Ingest, ShorterThanAWindowIsFormatError) {
  const fs::path dir = fresh_dir("ingest_short");
  auto rec = make_recording(Protocol::kLte4G, Transmitter::kBes, 1023, 1, "c");
  write_recording(*rec, dir / "a.iq", dir / "a.json");
  EXPECT_THROW(ingest_recording(dir / "a.iq", dir / "a.json"), FormatError);
}

TEST(Ingest, UnknownProtocolIsVocabularyError) {
  const fs::path dir = fresh_dir("ingest_vocab");
  auto rec = make_recording(Protocol::kLte4G, Transmitter::kBes, 2048, 1, "c");
  write_recording(*rec, dir / "a.iq", dir / "a.json");
  auto meta = nlohmann::json::parse(read_file(dir / "a.json"));
  meta["protocol"] = "LTE-M";
  write_file_atomic(dir / "a.json", meta.dump());
  EXPECT_THROW(ingest_recording(dir / "a.iq", dir / "a.json"), VocabularyError);
}

TEST(Ingest, MissingKeyIsFormatError) {
  const fs::path dir = fresh_dir("ingest_missing");
  auto rec = make_recording(Protocol::kLte4G, Transmitter::kBes, 2048, 1, "c");
  write_recording(*rec, dir / "a.iq", dir / "a.json");
  auto meta = nlohmann::json::parse(read_file(dir / "a.json"));
  meta.erase("day");
  write_file_atomic(dir / "a.json", meta.dump());
  EXPECT_THROW(ingest_recording(dir / "a.iq", dir / "a.json"), FormatError);
}

TEST(Corpus, LoadsSortedAndRejectsDuplicateIds) {
  const fs::path dir = fresh_dir("corpus");
  auto a = make_recording(Protocol::kLte4G, Transmitter::kBes, 2048, 1, "x");
  auto b = make_recording(Protocol::kNr5G, Transmitter::kMeb, 2048, 2, "y");
  write_recording(*b, dir / "b.iq", dir / "b.json");
  write_recording(*a, dir / "sub" / "a.iq", dir / "sub" / "a.json");
  const auto recs = load_corpus(dir);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0]->capture_id, "y");  // "b.iq" sorts before "sub/a.iq"
  write_recording(*a, dir / "c.iq", dir / "c.json");
  auto meta = nlohmann::json::parse(read_file(dir / "c.json"));
  meta["capture_id"] = "y";
  write_file_atomic(dir / "c.json", meta.dump());
  EXPECT_THROW(load_corpus(dir), FormatError);
}

TEST(Corpus, DirectoryLayoutImport) {
  const fs::path dir = fresh_dir("layout");
  auto rec = make_recording(Protocol::kWifi80211a, Transmitter::kMeb, 2048, 1, "unused");
  fs::create_directories(dir / "meb" / "wifi" / "day2");
  {
    std::ofstream f(dir / "meb" / "wifi" / "day2" / "cap.iq", std::ios::binary);
    f.write(reinterpret_cast<const char*>(rec->samples.data()),
            static_cast<std::streamsize>(rec->samples.size() * 8));
  }
  EXPECT_EQ(import_directory_layout(dir), 1u);
  const auto recs = load_corpus(dir);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0]->protocol, Protocol::kWifi80211a);
  EXPECT_EQ(recs[0]->transmitter, Transmitter::kMeb);
  EXPECT_EQ(recs[0]->sample_rate_hz, 5e6);
  EXPECT_EQ(recs[0]->day, "day2");
  EXPECT_EQ(import_directory_layout(dir), 0u);  // existing sidecars are kept
}

TEST(ClassQuota, PaperTotals) {
  EXPECT_EQ(class_quota(50000, 3), (std::vector<std::size_t>{16667, 16667, 16666}));
  const auto joint = class_quota(50000, 12);
  EXPECT_EQ(std::count(joint.begin(), joint.end(), 4167u), 8);
  EXPECT_EQ(std::count(joint.begin(), joint.end(), 4166u), 4);
  EXPECT_EQ(joint[7], 4167u);
  EXPECT_EQ(joint[8], 4166u);
}

TEST(SampleWindows, UniformClassesAndValidOffsets) {
  const auto corpus = full_corpus();
  for (TaskKind task : {TaskKind::kProtocol, TaskKind::kTransmitter, TaskKind::kJoint}) {
    const auto windows = sample_windows(corpus, 1003, task, 11);
    ASSERT_EQ(windows.size(), 1003u);
    std::map<std::size_t, std::size_t> hist;
    for (const auto& w : windows) {
      ++hist[w.label(task)];
      EXPECT_LE(w.offset + kWindowLength, w.source->samples.size());
      EXPECT_EQ(w.protocol, w.source->protocol);
      EXPECT_EQ(w.transmitter, w.source->transmitter);
    }
    ASSERT_EQ(hist.size(), class_count(task));
    std::size_t lo = SIZE_MAX, hi = 0;
    for (auto [cls, n] : hist) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    EXPECT_LE(hi - lo, 1u);
  }
}

TEST(SampleWindows, SameSeedSameOffsets) {
  const auto corpus = full_corpus();
  const auto a = sample_windows(corpus, 500, TaskKind::kJoint, 3);
  const auto b = sample_windows(corpus, 500, TaskKind::kJoint, 3);
  const auto c = sample_windows(corpus, 500, TaskKind::kJoint, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].offset, b[i].offset);
    EXPECT_EQ(a[i].capture_id(), b[i].capture_id());
    differs |= a[i].offset != c[i].offset;
  }
  EXPECT_TRUE(differs);
}

TEST(SampleWindows, MissingClassIsCoverageError) {
  auto corpus = full_corpus();
  std::erase_if(corpus, [](const RecordingPtr& r) { return r->transmitter == Transmitter::kMeb; });
  try {
    sample_windows(corpus, 100, TaskKind::kTransmitter, 1);
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_NE(std::string(e.what()).find("meb"), std::string::npos);
  }
  EXPECT_NO_THROW(sample_windows(corpus, 100, TaskKind::kProtocol, 1));
}

TEST(LabeledWindow, ChannelsReproduceSourceSlice) {
  const auto corpus = full_corpus(4096);
  const auto windows = sample_windows(corpus, 24, TaskKind::kJoint, 2);
  for (const auto& w : windows) {
    const auto direct =
        iq_to_channels(std::span(w.source->samples).subspan(w.offset, kWindowLength));
    EXPECT_EQ(w.channels().data.values(), direct.data.values());
  }
}

TEST(Split, PaperSizesPartitionTheSample) {
  const auto corpus = full_corpus();
  auto windows = sample_windows(corpus, 50000, TaskKind::kProtocol, 1);
  const auto split = split_dataset(windows, SplitSizes{}, 9, SplitPolicy::kRandom);
  EXPECT_EQ(split.train.size(), 38000u);
  EXPECT_EQ(split.val.size(), 2000u);
  EXPECT_EQ(split.test.size(), 10000u);
  // Union-complete and disjoint as window instances.
  std::multiset<std::pair<std::string, std::size_t>> all, parts;
  for (const auto& w : windows) all.insert({w.capture_id(), w.offset});
  for (const auto* s : {&split.train, &split.val, &split.test})
    for (const auto& w : *s) parts.insert({w.capture_id(), w.offset});
  EXPECT_EQ(all, parts);
}

TEST(Split, SizeMismatchIsConfigError) {
  const auto corpus = full_corpus();
  auto windows = sample_windows(corpus, 100, TaskKind::kProtocol, 1);
  EXPECT_THROW(split_dataset(windows, SplitSizes{50, 20, 20}, 1, SplitPolicy::kRandom),
               ConfigError);
}

TEST(Split, SameSeedSameMembership) {
  const auto corpus = full_corpus();
  auto windows = sample_windows(corpus, 300, TaskKind::kJoint, 1);
  const auto a = split_dataset(windows, {200, 40, 60}, 5, SplitPolicy::kRandom);
  const auto b = split_dataset(windows, {200, 40, 60}, 5, SplitPolicy::kRandom);
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    EXPECT_EQ(a.test[i].capture_id(), b.test[i].capture_id());
    EXPECT_EQ(a.test[i].offset, b.test[i].offset);
  }
}

TEST(Split, ByOffsetHasNoTrainTestOverlap) {
  const auto corpus = full_corpus(20000);
  auto windows = sample_windows(corpus, 1200, TaskKind::kJoint, 4);
  const auto split = split_dataset(windows, {800, 100, 300}, 6, SplitPolicy::kByOffset);
  // Interval-intersection oracle over every (train, test) pair per recording.
  std::map<std::string, std::vector<std::size_t>> train_starts;
  for (const auto& w : split.train) train_starts[w.capture_id()].push_back(w.offset);
  for (const auto& t : split.test) {
    for (std::size_t s : train_starts[t.capture_id()]) {
      const bool overlap = s < t.offset + kWindowLength && t.offset < s + kWindowLength;
      ASSERT_FALSE(overlap) << t.capture_id() << " test " << t.offset << " train " << s;
    }
    EXPECT_LE(t.offset + kWindowLength, t.source->samples.size());
  }
}

TEST(Manifest, RoundTripRebuildsTheSplit) {
  const fs::path dir = fresh_dir("manifest");
  const auto corpus = full_corpus();
  auto windows = sample_windows(corpus, 120, TaskKind::kTransmitter, 1);
  DatasetManifest m{split_dataset(windows, {80, 10, 30}, 2, SplitPolicy::kByOffset),
                    TaskKind::kTransmitter, NormalizePolicy::kUnitRms};
  write_manifest(m, dir / "m.json");
  const auto back = read_manifest(dir / "m.json", corpus);
  EXPECT_EQ(back.task, TaskKind::kTransmitter);
  EXPECT_EQ(back.normalize, NormalizePolicy::kUnitRms);
  EXPECT_EQ(back.split.policy, SplitPolicy::kByOffset);
  ASSERT_EQ(back.split.test.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(back.split.test[i].offset, m.split.test[i].offset);
    EXPECT_EQ(back.split.test[i].capture_id(), m.split.test[i].capture_id());
  }
  EXPECT_EQ(manifest_to_json(back), manifest_to_json(m));
}

}  // namespace
}  // namespace specmon
