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
#include <span>
#include <string_view>

#include "specmon/nn/tensor.hpp"

namespace specmon {

inline constexpr std::size_t kWindowLength = 1024;
inline constexpr std::size_t kFeatureChannels = 4;

// A view of kWindowLength complex baseband samples.
using IQWindow = std::span<const std::complex<float>>;

// [4, 1024] real tensor in channel order real, imaginary, magnitude, phase.
// Phase lies in (-pi, pi]; a sample at the origin has phase 0.
struct ChannelizedWindow {
  nn::Tensor<float> data{nn::Shape{kFeatureChannels, kWindowLength}};

  std::span<const float> channel(std::size_t c) const {
    return data.data().subspan(c * kWindowLength, kWindowLength);
  }
  std::span<float> channel(std::size_t c) {
    return data.data().subspan(c * kWindowLength, kWindowLength);
  }
};

enum class NormalizePolicy { kNone, kUnitRms };

std::string_view normalize_policy_name(NormalizePolicy policy);
NormalizePolicy parse_normalize_policy(std::string_view name);

// Throws DimensionError on a window that is not kWindowLength long and
// InputError naming the first non-finite sample.
ChannelizedWindow iq_to_channels(IQWindow window);

// kUnitRms rescales the real, imaginary and magnitude channels so the window's
// complex RMS is 1; the phase channel is untouched. A zero-power window is a
// DegenerateInputError under kUnitRms.
ChannelizedWindow normalize_window(ChannelizedWindow window,
                                   NormalizePolicy policy);

}  // namespace specmon
