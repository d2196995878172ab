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

#include <filesystem>
#include <span>
#include <vector>

namespace afss {

inline constexpr int kPipelineRate = 16000;

// Mono audio. Samples are nominally in [-1, 1]; values outside that range are
// allowed in memory and clipped only when written to disk.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kPipelineRate;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Reads RIFF/WAVE with 8/16/24/32-bit integer PCM or 32-bit float data.
// Multichannel files are averaged down to mono. Throws IoError if the file
// cannot be opened and FormatError (naming the path) for anything else.
Waveform LoadWav(const std::filesystem::path& path);

// Writes 16-bit mono PCM after hard-clipping to [-1, 1].
void SaveWav(const Waveform& w, const std::filesystem::path& path);

// Encodes to an in-memory 16-bit PCM WAV image (what SaveWav writes).
std::vector<unsigned char> EncodeWav16(const Waveform& w);
Waveform DecodeWav(std::span<const unsigned char> bytes, const std::string& origin);

// Band-limited (Kaiser-windowed sinc) resampling. The output has
// round(n * target_rate / sample_rate) samples; identical rates return a copy.
Waveform Resample(const Waveform& w, int target_rate);

// Stretches or squeezes `x` onto exactly `out_len` samples with the same
// windowed-sinc interpolator, treating the ratio out_len / x.size() as the
// rate change.
std::vector<double> ResampleToLength(std::span<const double> x, std::size_t out_len);

double Rms(std::span<const double> x);
double Energy(std::span<const double> x);

}  // namespace afss
