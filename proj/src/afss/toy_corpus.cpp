// Copyright 2026  The AFSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "afss/toy_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "afss/error.hpp"

namespace afss {

namespace fs = std::filesystem;

ToySpeaker MakeToySpeaker(int index, std::uint64_t seed) {
  RngStream rng(seed, "speaker-" + std::to_string(index), "toy_speaker");
  ToySpeaker s;
  char id[32];
  std::snprintf(id, sizeof id, "spk%02d", index);
  s.id = id;
  s.f0_hz = 85.0 + 22.0 * index + rng.Uniform(-5.0, 5.0);
  s.formants_hz = {rng.Uniform(400.0, 900.0), rng.Uniform(1100.0, 2000.0), rng.Uniform(2300.0, 3300.0)};
  s.formant_bw_hz = {rng.Uniform(60.0, 140.0), rng.Uniform(80.0, 180.0), rng.Uniform(120.0, 250.0)};
  s.tilt_db_per_khz = rng.Uniform(-9.0, -3.0);
  s.noise_level = rng.Uniform(0.003, 0.02);
  return s;
}

Waveform SynthesizeToyUtterance(const ToySpeaker& speaker, double seconds, RngStream& rng, int sample_rate) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  std::vector<double> x(n, 0.0);
  const double dt = 1.0 / sample_rate;

  // Pitch contour: declination + vibrato + slow random walk.
  const double vib_rate = rng.Uniform(3.0, 6.0);
  const double vib_depth = rng.Uniform(0.01, 0.03);
  const double vib_phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  const double f0_scale = rng.Uniform(0.92, 1.08);
  std::vector<double> f0(n);
  double drift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 160 == 0) drift = std::clamp(drift + rng.Normal() * 0.004, -0.08, 0.08);
    const double t = static_cast<double>(i) * dt;
    f0[i] = speaker.f0_hz * f0_scale * (1.0 - 0.05 * t / seconds) *
            (1.0 + vib_depth * std::sin(2.0 * std::numbers::pi * vib_rate * t + vib_phase) + drift);
  }

  // Syllable envelope: raised-cosine bumps with gaps.
  std::vector<double> env(n, 0.0);
  double cursor = rng.Uniform(0.02, 0.1);
  while (cursor < seconds) {
    const double len = rng.Uniform(0.15, 0.35);
    const double amp = rng.Uniform(0.6, 1.0);
    const auto a = static_cast<std::size_t>(cursor * sample_rate);
    const auto b = std::min(n, static_cast<std::size_t>((cursor + len) * sample_rate));
    for (std::size_t i = a; i < b; ++i) {
      const double u = static_cast<double>(i - a) / static_cast<double>(b - a);
      env[i] = std::max(env[i], amp * std::sin(std::numbers::pi * u));
    }
    cursor += len + rng.Uniform(0.03, 0.12);
  }

  auto gain = [&](double f) {
    double g = 0.05;
    for (std::size_t k = 0; k < speaker.formants_hz.size(); ++k) {
      const double d = (f - speaker.formants_hz[k]) / speaker.formant_bw_hz[k];
      g += std::exp(-0.5 * d * d);
    }
    return g * std::pow(10.0, speaker.tilt_db_per_khz * f / 1000.0 / 20.0);
  };

  const double max_hz = std::min(5000.0, 0.45 * sample_rate);
  const int n_harm = static_cast<int>(max_hz / speaker.f0_hz);
  std::vector<double> phases(static_cast<std::size_t>(n_harm));
  for (auto& p : phases) p = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    if (env[i] <= 0.0) continue;
    double acc = 0.0;
    for (int h = 1; h <= n_harm; ++h) {
      const double f = f0[i] * h;
      if (f >= max_hz) break;
      acc += gain(f) * std::sin(phases[static_cast<std::size_t>(h - 1)]);
    }
    x[i] = env[i] * acc;
    for (int h = 1; h <= n_harm; ++h) {
      auto& ph = phases[static_cast<std::size_t>(h - 1)];
      ph = std::fmod(ph + 2.0 * std::numbers::pi * f0[i] * h * dt, 2.0 * std::numbers::pi);
    }
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? 0.5 / peak : 0.0;
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] * scale + speaker.noise_level * rng.Normal() * (0.3 + env[i]);
  return Waveform(std::move(x), sample_rate);
}

fs::path MakeToyCorpus(const ToyCorpusOptions& opts, const fs::path& dir) {
  if (opts.n_speakers < 1 || opts.n_utterances < 1) throw ConfigError("toy corpus needs speakers and utterances");
  fs::create_directories(dir / "audio");
  std::vector<ToySpeaker> speakers;
  for (int s = 0; s < opts.n_speakers; ++s) speakers.push_back(MakeToySpeaker(s, opts.seed));
  std::vector<SampleRecord> records;
  for (int u = 0; u < opts.n_utterances; ++u) {
    const auto& spk = speakers[static_cast<std::size_t>(u % opts.n_speakers)];
    char id[64];
    std::snprintf(id, sizeof id, "%s_u%04d", spk.id.c_str(), u);
    RngStream rng(opts.seed, id, "toy_utterance");
    const auto w = SynthesizeToyUtterance(spk, opts.seconds, rng);
    SaveWav(w, dir / "audio" / (std::string(id) + ".wav"));
    SampleRecord r;
    r.utterance_id = id;
    r.path = "audio/" + std::string(id) + ".wav";
    r.label = Label::kReal;
    r.speaker_id = spk.id;
    r.provenance = Provenance::kReal;
    records.push_back(std::move(r));
  }
  const auto manifest = dir / "real.tsv";
  WriteManifest(records, manifest);
  return manifest;
}

}  // namespace afss
