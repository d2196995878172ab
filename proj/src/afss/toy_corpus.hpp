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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "afss/audio.hpp"
#include "afss/manifest.hpp"
#include "afss/rng.hpp"

namespace afss {

// A synthetic "speaker": fundamental range, formant envelope, tilt and
// breathiness. Distinct profiles give distinct, stable spectral identities.
struct ToySpeaker {
  std::string id;
  double f0_hz = 120.0;
  std::vector<double> formants_hz;
  std::vector<double> formant_bw_hz;
  double tilt_db_per_khz = -6.0;
  double noise_level = 0.01;
};

ToySpeaker MakeToySpeaker(int index, std::uint64_t seed);

// Harmonic source with a wandering pitch contour, syllable-like amplitude
// envelope and additive breath noise, peak-normalized to 0.5.
Waveform SynthesizeToyUtterance(const ToySpeaker& speaker, double seconds, RngStream& rng,
                                int sample_rate = kPipelineRate);

struct ToyCorpusOptions {
  int n_speakers = 8;
  int n_utterances = 40;
  double seconds = 2.0;
  std::uint64_t seed = 0;
};

// Writes `<dir>/audio/*.wav` and `<dir>/real.tsv`; returns the manifest path.
std::filesystem::path MakeToyCorpus(const ToyCorpusOptions& opts, const std::filesystem::path& dir);

}  // namespace afss
