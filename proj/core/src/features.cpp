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

#include "specmon/features.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "specmon/error.hpp"

namespace specmon {

std::string_view normalize_policy_name(NormalizePolicy policy) {
  return policy == NormalizePolicy::kUnitRms ? "unit_rms" : "none";
}

NormalizePolicy parse_normalize_policy(std::string_view name) {
  if (name == "none") return NormalizePolicy::kNone;
  if (name == "unit_rms") return NormalizePolicy::kUnitRms;
  throw ConfigError("unknown normalization policy '" + std::string(name) +
                    "' (expected none or unit_rms)");
}

ChannelizedWindow iq_to_channels(IQWindow window) {
  if (window.size() != kWindowLength) {
    throw DimensionError("IQ window holds " + std::to_string(window.size()) +
                         " samples, expected " + std::to_string(kWindowLength));
  }
  ChannelizedWindow out;
  auto re = out.channel(0), im = out.channel(1), mag = out.channel(2),
       phase = out.channel(3);
  for (std::size_t t = 0; t < kWindowLength; ++t) {
    const double i = window[t].real(), q = window[t].imag();
    if (!std::isfinite(i) || !std::isfinite(q)) {
      throw InputError("non-finite IQ sample at index " + std::to_string(t));
    }
    re[t] = static_cast<float>(i);
    im[t] = static_cast<float>(q);
    mag[t] = static_cast<float>(std::hypot(i, q));
    double p = (i == 0.0 && q == 0.0) ? 0.0 : std::atan2(q, i);
    // atan2(-0, negative) yields -pi; the closed end of the range is +pi.
    if (p == -std::numbers::pi) p = std::numbers::pi;
    phase[t] = static_cast<float>(p);
  }
  return out;
}

ChannelizedWindow normalize_window(ChannelizedWindow window,
                                   NormalizePolicy policy) {
  if (policy == NormalizePolicy::kNone) return window;
  auto re = window.channel(0), im = window.channel(1), mag = window.channel(2);
  double power = 0.0;
  for (std::size_t t = 0; t < kWindowLength; ++t) {
    power += static_cast<double>(re[t]) * re[t] + static_cast<double>(im[t]) * im[t];
  }
  power /= static_cast<double>(kWindowLength);
  if (!(power > 0.0)) {
    throw DegenerateInputError("unit_rms normalization of a zero-power window");
  }
  const double scale = 1.0 / std::sqrt(power);
  for (std::size_t t = 0; t < kWindowLength; ++t) {
    const double i = re[t] * scale, q = im[t] * scale;
    re[t] = static_cast<float>(i);
    im[t] = static_cast<float>(q);
    mag[t] = static_cast<float>(std::hypot(i, q));
  }
  return window;
}

}  // namespace specmon
