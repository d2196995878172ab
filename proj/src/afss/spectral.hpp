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

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "afss/audio.hpp"

namespace afss {

// In-place radix-2 complex FFT for a fixed power-of-two size.
class Fft {
 public:
  explicit Fft(std::size_t n);
  std::size_t size() const { return n_; }
  void Forward(std::span<std::complex<double>> x) const;
  // Unnormalized inverse; divide by size() to undo Forward.
  void Inverse(std::span<std::complex<double>> x) const;

 private:
  void Transform(std::span<std::complex<double>> x, bool inverse) const;
  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

struct StftParams {
  int n_fft = 1024;
  int hop_length = 256;
  int win_length = 1024;

  int n_bins() const { return n_fft / 2 + 1; }
  // Throws ConfigError unless n_fft is a power of two, hop <= win <= n_fft and
  // the squared Hann window overlap-adds to a strictly positive envelope.
  void Validate() const;
};

// Periodic Hann window of win_length samples, zero-padded (centred) to n_fft.
std::vector<double> HannWindow(const StftParams& p);

// Frames stored row-major: frame t, bin k at data[t * n_bins + k].
struct ComplexSpectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<std::complex<double>> data;
  StftParams params;
  int sample_rate = kPipelineRate;

  std::complex<double>& at(std::size_t t, std::size_t k) { return data[t * n_bins + k]; }
  const std::complex<double>& at(std::size_t t, std::size_t k) const { return data[t * n_bins + k]; }
};

// Centre-padded (reflect) STFT: n_frames = floor(n / hop) + 1.
ComplexSpectrogram Stft(const Waveform& w, const StftParams& p = {});

// Weighted overlap-add inverse. Without `length` the output has
// (n_frames - 1) * hop samples.
Waveform Istft(const ComplexSpectrogram& s, std::optional<std::size_t> length = std::nullopt);

struct MelSpectrogram {
  std::size_t n_frames = 0;
  int n_mels = 80;
  std::vector<double> data;  // row-major [n_frames x n_mels]
  StftParams params;
  int sample_rate = kPipelineRate;

  double& at(std::size_t t, std::size_t m) { return data[t * n_mels + m]; }
  double at(std::size_t t, std::size_t m) const { return data[t * n_mels + m]; }
};

// Triangular filters on the HTK mel scale spanning 0 .. sample_rate / 2,
// row-major [n_mels x n_bins], each peaking at 1.
std::vector<double> MelFilterbank(int sample_rate, int n_fft, int n_mels);

double HzToMel(double hz);
double MelToHz(double mel);

MelSpectrogram MelEncode(const Waveform& w, int n_mels = 80, int n_fft = 1024, int hop_length = 256);

// Maps mel magnitudes back to linear magnitudes with the clamped
// pseudo-inverse of the filterbank. Output is row-major [n_frames x n_bins].
std::vector<double> MelToLinear(const MelSpectrogram& m);

// Phase reconstruction from linear magnitudes, starting from zero phase.
Waveform GriffinLim(std::span<const double> magnitudes, std::size_t n_frames, const StftParams& p,
                    int sample_rate, int n_iters);

// Reference vocoder: pseudo-inverse mel → linear, then Griffin-Lim.
Waveform GriffinLimDecode(const MelSpectrogram& m, int n_iters = 32);

}  // namespace afss
