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

// Synthetic labeled baseband recordings: protocol-like OFDM waveforms stamped
// with transmitter-specific hardware impairments. The profiles are stand-ins
// with the rough shape of their namesakes, not standards-compliant signals.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "specmon/datasets.hpp"
#include "specmon/labels.hpp"

namespace specmon::synth {

enum class Constellation { kQpsk };

struct ProtocolProfile {
  std::string name;
  Protocol protocol = Protocol::kLte4G;
  std::size_t fft_size = 128;
  std::size_t cyclic_prefix_len = 9;
  std::size_t occupied_subcarriers = 72;
  Constellation constellation = Constellation::kQpsk;
  // Fraction of time on air. Bursts of `symbols_per_burst` symbols alternate
  // with silent gaps sized to hit this ratio.
  double duty_cycle = 0.9;
  std::size_t symbols_per_burst = 8;
  double sample_rate_hz = 7.68e6;

  std::size_t symbol_length() const { return fft_size + cyclic_prefix_len; }
  std::size_t gap_length() const;
};

struct TransmitterFingerprint {
  std::string name;
  Transmitter transmitter = Transmitter::kBes;
  double cfo_hz = 0.0;
  double iq_gain_imbalance_db = 0.0;
  double iq_phase_imbalance_rad = 0.0;
  std::complex<double> dc_offset{0.0, 0.0};
  double cubic_nonlinearity_coeff = 0.0;
  // Standard deviation of each step of the phase random walk.
  double phase_noise_std_rad = 0.0;
  double tx_power_db = 0.0;
};

// Noise-free sentinel for snr_db.
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct Scenario {
  std::vector<std::pair<ProtocolProfile, TransmitterFingerprint>> pairs;
  std::size_t samples_per_recording = 200'000;
  std::size_t recordings_per_pair = 5;
  double snr_db = 20.0;
  std::uint64_t master_seed = 1;
  double center_frequency_hz = 2.685e9;
};

ProtocolProfile wifi_like_profile();
ProtocolProfile lte_like_profile();
ProtocolProfile nr_like_profile();
// lte-like, nr-like, wifi-like: protocol index order.
std::vector<ProtocolProfile> default_profiles();
// bes-like, browning-like, honors-like, meb-like, with transmit power
// stepping down 2 dB per transmitter from 0 dB.
std::vector<TransmitterFingerprint> default_fingerprints();
// Every profile paired with every fingerprint: 12 pairs x 5 recordings at
// 20 dB SNR.
Scenario default_scenario(std::uint64_t master_seed = 1);

void validate(const ProtocolProfile& profile);
void validate(const TransmitterFingerprint& fingerprint);
void validate(const Scenario& scenario);

nlohmann::json to_json(const Scenario& scenario);
// Missing fields take the defaults above; snr_db may be null for no noise.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

// Bursts of OFDM symbols with random QPSK on the occupied subcarriers (DC
// left empty), cyclic prefix prepended, unit average power over active
// samples, and zeros in the idle gaps.
std::vector<std::complex<float>> generate_waveform(const ProtocolProfile& profile,
                                                   std::size_t n,
                                                   std::uint64_t seed);

// In order: IQ imbalance, DC offset, cubic nonlinearity x + c*x*|x|^2, phase
// random walk, CFO rotation exp(j*2*pi*cfo*t/fs), power scaling. `seed` drives
// the phase walk only.
std::vector<std::complex<float>> apply_transmitter_fingerprint(
    std::vector<std::complex<float>> samples, const TransmitterFingerprint& fp,
    double sample_rate_hz, std::uint64_t seed = 0);

// Adds circular complex Gaussian noise at the variance implied by the
// measured mean signal power. kNoNoise returns the input unchanged.
std::vector<std::complex<float>> apply_awgn(std::vector<std::complex<float>> samples,
                                            double snr_db, std::uint64_t seed);

// RMS instantaneous frequency deviation the phase walk induces, in Hz.
double phase_noise_jitter_hz(const TransmitterFingerprint& fp,
                             double sample_rate_hz);

// Deterministic in-memory recording for (pair, repetition).
IQRecording generate_recording(const Scenario& scenario, std::size_t pair_index,
                               std::size_t repetition);

struct CorpusEntry {
  std::string capture_id;
  std::filesystem::path data_path;
  std::filesystem::path metadata_path;
  Protocol protocol = Protocol::kLte4G;
  Transmitter transmitter = Transmitter::kBes;
  std::uint64_t seed = 0;
};

struct CorpusManifest {
  std::vector<CorpusEntry> entries;
};

// Writes one .iq + .json pair per (pair, repetition) and a corpus.json index
// into `out_dir`. Recordings are generated in parallel; output does not depend
// on scheduling.
CorpusManifest generate_corpus(const Scenario& scenario,
                               const std::filesystem::path& out_dir);

}  // namespace specmon::synth
