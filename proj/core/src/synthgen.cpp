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

#include "specmon/synthgen.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "specmon/error.hpp"
#include "specmon/io.hpp"
#include "specmon/runtime.hpp"

namespace specmon::synth {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// FFTW's planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class InverseDft {
 public:
  explicit InverseDft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_BACKWARD,
                             FFTW_ESTIMATE);
  }
  ~InverseDft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  InverseDft(const InverseDft&) = delete;
  InverseDft& operator=(const InverseDft&) = delete;

  fftw_complex* input() { return in_; }
  const fftw_complex* run() {
    fftw_execute(plan_);
    return out_;
  }

 private:
  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

json profile_json(const ProtocolProfile& p) {
  return {{"name", p.name},
          {"protocol", std::string(protocol_name(p.protocol))},
          {"fft_size", p.fft_size},
          {"cyclic_prefix_len", p.cyclic_prefix_len},
          {"occupied_subcarriers", p.occupied_subcarriers},
          {"symbol_constellation", "QPSK"},
          {"duty_cycle", p.duty_cycle},
          {"symbols_per_burst", p.symbols_per_burst},
          {"sample_rate_hz", p.sample_rate_hz}};
}

json fingerprint_json(const TransmitterFingerprint& f) {
  return {{"name", f.name},
          {"transmitter", std::string(transmitter_name(f.transmitter))},
          {"cfo_hz", f.cfo_hz},
          {"iq_gain_imbalance_db", f.iq_gain_imbalance_db},
          {"iq_phase_imbalance_rad", f.iq_phase_imbalance_rad},
          {"dc_offset", {f.dc_offset.real(), f.dc_offset.imag()}},
          {"cubic_nonlinearity_coeff", f.cubic_nonlinearity_coeff},
          {"phase_noise_std_rad", f.phase_noise_std_rad},
          {"tx_power_db", f.tx_power_db}};
}

ProtocolProfile profile_from_json(const json& j) {
  ProtocolProfile p;
  p.name = j.at("name").get<std::string>();
  p.protocol = parse_protocol(j.at("protocol").get<std::string>());
  p.fft_size = j.value("fft_size", p.fft_size);
  p.cyclic_prefix_len = j.value("cyclic_prefix_len", p.cyclic_prefix_len);
  p.occupied_subcarriers = j.value("occupied_subcarriers", p.occupied_subcarriers);
  if (j.value("symbol_constellation", std::string("QPSK")) != "QPSK") {
    throw ConfigError("profile " + p.name + ": only QPSK is supported");
  }
  p.duty_cycle = j.value("duty_cycle", p.duty_cycle);
  p.symbols_per_burst = j.value("symbols_per_burst", p.symbols_per_burst);
  p.sample_rate_hz = j.value("sample_rate_hz", p.sample_rate_hz);
  return p;
}

TransmitterFingerprint fingerprint_from_json(const json& j) {
  TransmitterFingerprint f;
  f.name = j.at("name").get<std::string>();
  f.transmitter = parse_transmitter(j.at("transmitter").get<std::string>());
  f.cfo_hz = j.value("cfo_hz", 0.0);
  f.iq_gain_imbalance_db = j.value("iq_gain_imbalance_db", 0.0);
  f.iq_phase_imbalance_rad = j.value("iq_phase_imbalance_rad", 0.0);
  if (j.contains("dc_offset")) {
    const auto& dc = j.at("dc_offset");
    f.dc_offset = {dc.at(0).get<double>(), dc.at(1).get<double>()};
  }
  f.cubic_nonlinearity_coeff = j.value("cubic_nonlinearity_coeff", 0.0);
  f.phase_noise_std_rad = j.value("phase_noise_std_rad", 0.0);
  f.tx_power_db = j.value("tx_power_db", 0.0);
  return f;
}

std::string capture_id_for(const Scenario& s, std::size_t pair, std::size_t rep) {
  const auto& [profile, fp] = s.pairs[pair];
  std::string r = std::to_string(rep);
  if (r.size() < 2) r.insert(0, 2 - r.size(), '0');
  return fp.name + "__" + profile.name + "__r" + r;
}

}  // namespace

std::size_t ProtocolProfile::gap_length() const {
  const double burst = static_cast<double>(symbols_per_burst * symbol_length());
  return static_cast<std::size_t>(std::lround(burst * (1.0 - duty_cycle) / duty_cycle));
}

ProtocolProfile wifi_like_profile() {
  ProtocolProfile p;
  p.name = "wifi-like";
  p.protocol = Protocol::kWifi80211a;
  p.fft_size = 64;
  p.cyclic_prefix_len = 16;
  p.occupied_subcarriers = 52;
  p.duty_cycle = 0.6;
  p.sample_rate_hz = 5e6;
  return p;
}

ProtocolProfile lte_like_profile() {
  ProtocolProfile p;
  p.name = "lte-like";
  p.protocol = Protocol::kLte4G;
  p.fft_size = 128;
  p.cyclic_prefix_len = 9;
  p.occupied_subcarriers = 72;
  p.duty_cycle = 0.9;
  p.sample_rate_hz = 7.68e6;
  return p;
}

ProtocolProfile nr_like_profile() {
  ProtocolProfile p = lte_like_profile();
  p.name = "nr-like";
  p.protocol = Protocol::kNr5G;
  p.occupied_subcarriers = 96;
  return p;
}

std::vector<ProtocolProfile> default_profiles() {
  return {lte_like_profile(), nr_like_profile(), wifi_like_profile()};
}

std::vector<TransmitterFingerprint> default_fingerprints() {
  struct Row {
    const char* name;
    Transmitter tx;
    double cfo, gain_db, cubic, power_db;
  };
  const Row rows[] = {
      {"bes-like", Transmitter::kBes, -800.0, 0.2, 0.01, 0.0},
      {"browning-like", Transmitter::kBrowning, -200.0, 0.5, 0.03, -2.0},
      {"honors-like", Transmitter::kHonors, 300.0, 0.8, 0.05, -4.0},
      {"meb-like", Transmitter::kMeb, 900.0, 1.1, 0.07, -6.0},
  };
  std::vector<TransmitterFingerprint> out;
  for (const Row& r : rows) {
    TransmitterFingerprint f;
    f.name = r.name;
    f.transmitter = r.tx;
    f.cfo_hz = r.cfo;
    f.iq_gain_imbalance_db = r.gain_db;
    f.cubic_nonlinearity_coeff = r.cubic;
    f.tx_power_db = r.power_db;
    f.iq_phase_imbalance_rad = 0.02;
    f.phase_noise_std_rad = 1e-5;
    out.push_back(std::move(f));
  }
  return out;
}

Scenario default_scenario(std::uint64_t master_seed) {
  Scenario s;
  s.master_seed = master_seed;
  for (const auto& fp : default_fingerprints()) {
    for (const auto& profile : default_profiles()) s.pairs.emplace_back(profile, fp);
  }
  return s;
}

void validate(const ProtocolProfile& p) {
  if (p.fft_size < 2 || p.occupied_subcarriers == 0 ||
      p.occupied_subcarriers >= p.fft_size || p.occupied_subcarriers % 2 != 0) {
    throw ConfigError("profile " + p.name +
                      ": occupied_subcarriers must be even, nonzero and below fft_size");
  }
  if (p.cyclic_prefix_len >= p.fft_size) {
    throw ConfigError("profile " + p.name + ": cyclic_prefix_len must be below fft_size");
  }
  if (!(p.duty_cycle > 0.0 && p.duty_cycle <= 1.0)) {
    throw ConfigError("profile " + p.name + ": duty_cycle must lie in (0, 1]");
  }
  if (p.symbols_per_burst == 0 || !(p.sample_rate_hz > 0.0)) {
    throw ConfigError("profile " + p.name +
                      ": symbols_per_burst and sample_rate_hz must be positive");
  }
}

void validate(const TransmitterFingerprint& f) {
  const double values[] = {f.cfo_hz,
                           f.iq_gain_imbalance_db,
                           f.iq_phase_imbalance_rad,
                           f.dc_offset.real(),
                           f.dc_offset.imag(),
                           f.cubic_nonlinearity_coeff,
                           f.phase_noise_std_rad,
                           f.tx_power_db};
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ConfigError("fingerprint " + f.name + ": all fields must be finite");
    }
  }
  if (f.phase_noise_std_rad < 0.0) {
    throw ConfigError("fingerprint " + f.name + ": phase_noise_std_rad must be >= 0");
  }
}

void validate(const Scenario& s) {
  if (s.pairs.empty()) throw ConfigError("scenario needs at least one pair");
  if (s.samples_per_recording < kWindowLength) {
    throw ConfigError("scenario samples_per_recording must be at least " +
                      std::to_string(kWindowLength));
  }
  if (s.recordings_per_pair == 0) {
    throw ConfigError("scenario recordings_per_pair must be positive");
  }
  for (const auto& [profile, fp] : s.pairs) {
    validate(profile);
    validate(fp);
  }
}

nlohmann::json to_json(const Scenario& s) {
  json pairs = json::array();
  for (const auto& [profile, fp] : s.pairs) {
    pairs.push_back({{"profile", profile_json(profile)},
                     {"fingerprint", fingerprint_json(fp)}});
  }
  return {{"pairs", pairs},
          {"samples_per_recording", s.samples_per_recording},
          {"recordings_per_pair", s.recordings_per_pair},
          {"snr_db", std::isinf(s.snr_db) ? json(nullptr) : json(s.snr_db)},
          {"master_seed", s.master_seed},
          {"center_frequency_hz", s.center_frequency_hz}};
}

Scenario scenario_from_json(const nlohmann::json& doc) {
  Scenario s;
  try {
    for (const auto& item : doc.at("pairs")) {
      s.pairs.emplace_back(profile_from_json(item.at("profile")),
                           fingerprint_from_json(item.at("fingerprint")));
    }
    s.samples_per_recording = doc.value("samples_per_recording", s.samples_per_recording);
    s.recordings_per_pair = doc.value("recordings_per_pair", s.recordings_per_pair);
    if (doc.contains("snr_db")) {
      s.snr_db = doc.at("snr_db").is_null() ? kNoNoise : doc.at("snr_db").get<double>();
    }
    s.master_seed = doc.value("master_seed", s.master_seed);
    s.center_frequency_hz = doc.value("center_frequency_hz", s.center_frequency_hz);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  validate(s);
  return s;
}

Scenario load_scenario(const fs::path& path) {
  try {
    return scenario_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::vector<std::complex<float>> generate_waveform(const ProtocolProfile& profile,
                                                   std::size_t n,
                                                   std::uint64_t seed) {
  validate(profile);
  const std::size_t fft = profile.fft_size;
  const std::size_t cp = profile.cyclic_prefix_len;
  const std::size_t half = profile.occupied_subcarriers / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(profile.occupied_subcarriers));
  const double a = 1.0 / std::numbers::sqrt2;

  std::vector<std::complex<float>> out(n, {0.0f, 0.0f});
  std::mt19937_64 rng(seed);
  InverseDft idft(fft);
  const std::size_t gap = profile.gap_length();

  std::size_t pos = 0;
  while (pos < n) {
    for (std::size_t s = 0; s < profile.symbols_per_burst && pos < n; ++s) {
      fftw_complex* bins = idft.input();
      for (std::size_t k = 0; k < fft; ++k) bins[k][0] = bins[k][1] = 0.0;
      std::uint64_t bits = 0;
      std::size_t left = 0;
      auto place = [&](std::size_t bin) {
        if (left == 0) {
          bits = rng();
          left = 32;
        }
        bins[bin][0] = (bits & 1u) ? a : -a;
        bins[bin][1] = (bits & 2u) ? a : -a;
        bits >>= 2;
        --left;
      };
      for (std::size_t k = 1; k <= half; ++k) place(k);
      for (std::size_t k = 1; k <= half; ++k) place(fft - k);
      const fftw_complex* time = idft.run();
      for (std::size_t t = 0; t < cp + fft && pos < n; ++t, ++pos) {
        const std::size_t src = (t + fft - cp) % fft;
        out[pos] = {static_cast<float>(time[src][0] * scale),
                    static_cast<float>(time[src][1] * scale)};
      }
    }
    pos += gap;
  }
  return out;
}

std::vector<std::complex<float>> apply_transmitter_fingerprint(
    std::vector<std::complex<float>> samples, const TransmitterFingerprint& fp,
    double sample_rate_hz, std::uint64_t seed) {
  validate(fp);
  const double gain = std::pow(10.0, fp.iq_gain_imbalance_db / 20.0);
  const double amp = std::pow(10.0, fp.tx_power_db / 20.0);
  const double sin_phi = std::sin(fp.iq_phase_imbalance_rad);
  const double cos_phi = std::cos(fp.iq_phase_imbalance_rad);
  const double omega = 2.0 * std::numbers::pi * fp.cfo_hz / sample_rate_hz;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  double walk = 0.0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const double i = samples[t].real(), q = samples[t].imag();
    std::complex<double> y(i, gain * (sin_phi * i + cos_phi * q));
    y += fp.dc_offset;
    y += fp.cubic_nonlinearity_coeff * y * std::norm(y);
    if (fp.phase_noise_std_rad > 0.0) walk += fp.phase_noise_std_rad * step(rng);
    const double angle = omega * static_cast<double>(t) + walk;
    const double c = std::cos(angle), s = std::sin(angle);
    const double re = (y.real() * c - y.imag() * s) * amp;
    const double im = (y.real() * s + y.imag() * c) * amp;
    samples[t] = {static_cast<float>(re), static_cast<float>(im)};
  }
  return samples;
}

std::vector<std::complex<float>> apply_awgn(std::vector<std::complex<float>> samples,
                                            double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return samples;
  double power = 0.0;
  for (const auto& s : samples) power += std::norm(std::complex<double>(s));
  power /= static_cast<double>(samples.size());
  if (!(power > 0.0)) {
    throw DegenerateInputError("AWGN requested for a zero-power signal");
  }
  const double noise_power = power / std::pow(10.0, snr_db / 10.0);
  std::normal_distribution<double> dist(0.0, std::sqrt(noise_power / 2.0));
  std::mt19937_64 rng(seed);
  for (auto& s : samples) {
    const double ni = dist(rng);
    const double nq = dist(rng);
    s = {static_cast<float>(s.real() + ni), static_cast<float>(s.imag() + nq)};
  }
  return samples;
}

double phase_noise_jitter_hz(const TransmitterFingerprint& fp,
                             double sample_rate_hz) {
  return fp.phase_noise_std_rad * sample_rate_hz / (2.0 * std::numbers::pi);
}

IQRecording generate_recording(const Scenario& scenario, std::size_t pair_index,
                               std::size_t repetition) {
  const auto& [profile, fp] = scenario.pairs.at(pair_index);
  const std::uint64_t seed =
      derive_seed(scenario.master_seed, {pair_index, repetition});
  auto samples = generate_waveform(profile, scenario.samples_per_recording,
                                   derive_seed(seed, {1}));
  samples = apply_transmitter_fingerprint(std::move(samples), fp,
                                          profile.sample_rate_hz,
                                          derive_seed(seed, {2}));
  samples = apply_awgn(std::move(samples), scenario.snr_db, derive_seed(seed, {3}));

  IQRecording rec;
  rec.samples = std::move(samples);
  rec.sample_rate_hz = profile.sample_rate_hz;
  rec.center_frequency_hz = scenario.center_frequency_hz;
  rec.protocol = profile.protocol;
  rec.transmitter = fp.transmitter;
  rec.day = "synthetic";
  rec.capture_id = capture_id_for(scenario, pair_index, repetition);
  rec.extra = {{"generator",
                {{"profile", profile.name},
                 {"fingerprint", fp.name},
                 {"seed", seed},
                 {"snr_db", std::isinf(scenario.snr_db) ? json(nullptr)
                                                        : json(scenario.snr_db)}}}};
  return rec;
}

CorpusManifest generate_corpus(const Scenario& scenario, const fs::path& out_dir) {
  validate(scenario);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create corpus directory " + out_dir.string() + ": " +
                  ec.message());
  }
  const std::size_t reps = scenario.recordings_per_pair;
  const std::size_t total = scenario.pairs.size() * reps;
  CorpusManifest manifest;
  manifest.entries.resize(total);
  parallel_for(0, total, [&](std::size_t i) {
    const std::size_t pair = i / reps, rep = i % reps;
    IQRecording rec = generate_recording(scenario, pair, rep);
    CorpusEntry& e = manifest.entries[i];
    e.capture_id = rec.capture_id;
    e.data_path = out_dir / (rec.capture_id + ".iq");
    e.metadata_path = out_dir / (rec.capture_id + ".json");
    e.protocol = rec.protocol;
    e.transmitter = rec.transmitter;
    e.seed = derive_seed(scenario.master_seed, {pair, rep});
    write_recording(rec, e.data_path, e.metadata_path);
  });
  json index = {{"format", "specmon-corpus"},
                {"scenario", to_json(scenario)},
                {"recordings", json::array()}};
  for (const auto& e : manifest.entries) {
    index["recordings"].push_back(
        {{"capture_id", e.capture_id},
         {"data", e.data_path.filename().string()},
         {"metadata", e.metadata_path.filename().string()},
         {"protocol", std::string(protocol_name(e.protocol))},
         {"transmitter", std::string(transmitter_name(e.transmitter))},
         {"seed", e.seed}});
  }
  write_file_atomic(out_dir / "corpus.json", index.dump(2) + "\n");
  return manifest;
}

}  // namespace specmon::synth
