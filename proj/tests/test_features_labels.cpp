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

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "specmon/error.hpp"
#include "specmon/features.hpp"
#include "specmon/labels.hpp"

namespace specmon {
namespace {

using cf = std::complex<float>;

std::vector<cf> random_iq(std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<cf> v(kWindowLength);
  for (auto& s : v) s = {static_cast<float>(d(rng)), static_cast<float>(d(rng))};
  return v;
}

TEST(IqToChannels, ThreeFourFiveTriangle) {
  std::vector<cf> v(kWindowLength, cf(0.6f, -0.8f));
  const auto w = iq_to_channels(v);
  EXPECT_FLOAT_EQ(w.channel(0)[5], 0.6f);
  EXPECT_FLOAT_EQ(w.channel(1)[5], -0.8f);
  EXPECT_NEAR(w.channel(2)[5], 1.0f, 1e-6);
  EXPECT_NEAR(w.channel(3)[5], -0.9272952180016122, 1e-6);
}

TEST(IqToChannels, OriginHasZeroPhase) {
  std::vector<cf> v(kWindowLength, cf(0.0f, 0.0f));
  const auto w = iq_to_channels(v);
  EXPECT_EQ(w.channel(3)[0], 0.0f);
  EXPECT_EQ(w.channel(2)[0], 0.0f);
}

TEST(IqToChannels, NegativeRealAxisIsPlusPi) {
  std::vector<cf> v(kWindowLength, cf(-1.0f, 0.0f));
  v[1] = cf(-1.0f, -0.0f);
  const auto w = iq_to_channels(v);
  EXPECT_FLOAT_EQ(w.channel(3)[0], static_cast<float>(std::numbers::pi));
  EXPECT_FLOAT_EQ(w.channel(3)[1], static_cast<float>(std::numbers::pi));
}

TEST(IqToChannels, ChannelInvariantsOnRandomWindows) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto v = random_iq(seed, 0.1 + seed);
    const auto w = iq_to_channels(v);
    for (std::size_t t = 0; t < kWindowLength; ++t) {
      const float re = w.channel(0)[t], im = w.channel(1)[t];
      EXPECT_EQ(re, v[t].real());  // exact reconstruction of I and Q
      EXPECT_EQ(im, v[t].imag());
      EXPECT_NEAR(w.channel(2)[t], std::hypot(double(re), double(im)),
                  1e-6 * std::max(1.0, std::hypot(double(re), double(im))));
      EXPECT_GE(w.channel(2)[t], 0.0f);
      EXPECT_NEAR(w.channel(3)[t], std::atan2(double(im), double(re)), 1e-6);
      EXPECT_GT(w.channel(3)[t], -std::numbers::pi);
      EXPECT_LE(w.channel(3)[t], static_cast<float>(std::numbers::pi));
    }
  }
}

TEST(IqToChannels, WrongLengthIsDimensionError) {
  std::vector<cf> v(1000);
  EXPECT_THROW(iq_to_channels(v), DimensionError);
}

TEST(IqToChannels, NonFiniteSampleNamesIndex) {
  auto v = random_iq(1);
  v[17] = cf(std::numeric_limits<float>::infinity(), 0.0f);
  try {
    iq_to_channels(v);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
}

TEST(NormalizeWindow, NoneIsIdentity) {
  const auto w = iq_to_channels(random_iq(2));
  EXPECT_EQ(normalize_window(w, NormalizePolicy::kNone).data.values(), w.data.values());
}

TEST(NormalizeWindow, ConstantTwoBecomesOne) {
  std::vector<cf> v(kWindowLength, cf(2.0f, 0.0f));
  const auto w = normalize_window(iq_to_channels(v), NormalizePolicy::kUnitRms);
  for (float x : w.channel(0)) EXPECT_FLOAT_EQ(x, 1.0f);
  for (float x : w.channel(2)) EXPECT_FLOAT_EQ(x, 1.0f);
}

TEST(NormalizeWindow, UnitRmsOnRandomWindows) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto raw = iq_to_channels(random_iq(seed, 0.01 + 3.0 * seed));
    const auto w = normalize_window(raw, NormalizePolicy::kUnitRms);
    double power = 0.0;
    for (std::size_t t = 0; t < kWindowLength; ++t) {
      power += double(w.channel(0)[t]) * w.channel(0)[t] +
               double(w.channel(1)[t]) * w.channel(1)[t];
    }
    EXPECT_NEAR(std::sqrt(power / kWindowLength), 1.0, 1e-6);
    EXPECT_EQ(std::vector<float>(w.channel(3).begin(), w.channel(3).end()),
              std::vector<float>(raw.channel(3).begin(), raw.channel(3).end()));
  }
}

TEST(NormalizeWindow, ZeroPowerIsDegenerate) {
  std::vector<cf> v(kWindowLength);
  EXPECT_THROW(normalize_window(iq_to_channels(v), NormalizePolicy::kUnitRms),
               DegenerateInputError);
}

TEST(NormalizePolicy, Names) {
  EXPECT_EQ(parse_normalize_policy("unit_rms"), NormalizePolicy::kUnitRms);
  EXPECT_EQ(normalize_policy_name(NormalizePolicy::kNone), "none");
  EXPECT_THROW(parse_normalize_policy("zscore"), ConfigError);
}

TEST(Labels, ClassCounts) {
  EXPECT_EQ(class_count(TaskKind::kProtocol), 3u);
  EXPECT_EQ(class_count(TaskKind::kTransmitter), 4u);
  EXPECT_EQ(class_count(TaskKind::kJoint), 12u);
}

TEST(Labels, ClassMaps) {
  EXPECT_EQ(class_names(TaskKind::kProtocol),
            (std::vector<std::string>{"4G", "5G NR", "802.11a"}));
  EXPECT_EQ(class_names(TaskKind::kTransmitter),
            (std::vector<std::string>{"bes", "browning", "honors", "meb"}));
  const auto joint = class_names(TaskKind::kJoint);
  ASSERT_EQ(joint.size(), 12u);
  EXPECT_EQ(joint[0], "bes_4G");
  EXPECT_EQ(joint[9], "meb_4G");
  EXPECT_EQ(joint[11], "meb_802.11a");
}

TEST(Labels, JointEncodingIsTransmitterMajor) {
  const auto names = class_names(TaskKind::kJoint);
  for (Transmitter t : kTransmitters) {
    for (Protocol p : kProtocols) {
      const auto idx = encode_label(p, t, TaskKind::kJoint);
      EXPECT_EQ(names[idx], std::string(transmitter_name(t)) + "_" +
                                std::string(protocol_name(p)));
      EXPECT_EQ(class_names(TaskKind::kProtocol)[encode_label(p, t, TaskKind::kProtocol)],
                protocol_name(p));
    }
  }
}

TEST(Labels, VocabularyErrors) {
  EXPECT_THROW(parse_protocol("3G"), VocabularyError);
  EXPECT_THROW(parse_transmitter("med"), VocabularyError);
  EXPECT_EQ(parse_transmitter("meb"), Transmitter::kMeb);
  EXPECT_EQ(parse_protocol("5G NR"), Protocol::kNr5G);
}

TEST(Labels, UnknownTaskListsChoices) {
  try {
    parse_task("bogus");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("{protocol, transmitter, joint}"),
              std::string::npos);
  }
}

}  // namespace
}  // namespace specmon
