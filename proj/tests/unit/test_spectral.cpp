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

#include <algorithm>
#include <cmath>

#include "afss/error.hpp"
#include "afss/spectral.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using afss::Waveform;
namespace t = afss::testing;

TEST_CASE("stft of silence is silent and reconstructs to silence") {
  const Waveform zero(std::vector<double>(4000, 0.0), 16000);
  const auto s = afss::Stft(zero);
  CHECK(s.n_frames == 4000 / 256 + 1);
  for (const auto& c : s.data) CHECK(std::abs(c) == 0.0);
  const auto back = afss::Istft(s, zero.size());
  for (double v : back.samples) CHECK(v == 0.0);
}

TEST_CASE("stft/istft perfect reconstruction on the interior") {
  const Waveform x(t::WhiteNoise(16000, 0.3, 11), 16000);
  for (auto p : {afss::StftParams{1024, 256, 1024}, afss::StftParams{512, 128, 400}, afss::StftParams{256, 64, 256}}) {
    const auto y = afss::Istft(afss::Stft(x, p), x.size());
    REQUIRE(y.size() == x.size());
    const std::size_t edge = static_cast<std::size_t>(p.win_length / 2);
    double num = 0.0, den = 0.0;
    for (std::size_t i = edge; i + edge < x.size(); ++i) {
      num += (x.samples[i] - y.samples[i]) * (x.samples[i] - y.samples[i]);
      den += x.samples[i] * x.samples[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-6);
  }
}

TEST_CASE("single-frame spectrum of a tone peaks at the tone's bin") {
  // 1000 Hz = bin 64 exactly for n_fft = 1024 at 16 kHz.
  const Waveform x(t::Tone(1000.0, 0.2), 16000);
  const auto s = afss::Stft(x);
  const std::size_t mid = s.n_frames / 2;
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.n_bins; ++k)
    if (std::abs(s.at(mid, k)) > std::abs(s.at(mid, best))) best = k;
  CHECK(best == 64);
  // Analytic magnitude of a Hann-windowed sinusoid at an exact bin: A * N / 4.
  CHECK(std::abs(s.at(mid, 64)) == doctest::Approx(0.5 * 1024 / 4).epsilon(1e-3));
}

TEST_CASE("stft geometry validation") {
  CHECK_THROWS_AS((afss::StftParams{1024, 1024, 1024}.Validate()), afss::ConfigError);  // hop == win: Hann zeros
  CHECK_THROWS_AS((afss::StftParams{1024, 256, 2048}.Validate()), afss::ConfigError);
  CHECK_THROWS_AS((afss::StftParams{1000, 250, 1000}.Validate()), afss::ConfigError);
  CHECK_THROWS_AS((afss::StftParams{1024, 600, 512}.Validate()), afss::ConfigError);
  CHECK_NOTHROW((afss::StftParams{1024, 512, 1024}.Validate()));
}

TEST_CASE("mel encode: frame count and non-negativity") {
  for (std::size_t n : {1000u, 16000u, 16001u, 33333u}) {
    const Waveform x(t::WhiteNoise(n, 0.2, n), 16000);
    const auto m = afss::MelEncode(x);
    CHECK(m.n_frames == n / 256 + 1);
    CHECK(m.n_mels == 80);
    for (double v : m.data) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("mel filterbank spans 0 to Nyquist") {
  const auto fb = afss::MelFilterbank(16000, 1024, 80);
  const int n_bins = 513;
  // Every filter has support and the last one reaches near Nyquist.
  for (int m = 0; m < 80; ++m) {
    double sum = 0.0;
    for (int k = 0; k < n_bins; ++k) sum += fb[static_cast<std::size_t>(m * n_bins + k)];
    CHECK(sum > 0.0);
  }
  CHECK(fb[static_cast<std::size_t>(79 * n_bins + 510)] > 0.0);
  CHECK(afss::MelToHz(afss::HzToMel(8000.0)) == doctest::Approx(8000.0));
}

TEST_CASE("griffin-lim decode of silence is silence") {
  const Waveform zero(std::vector<double>(8000, 0.0), 16000);
  const auto y = afss::GriffinLimDecode(afss::MelEncode(zero));
  for (double v : y.samples) CHECK(v == 0.0);
}

TEST_CASE("griffin-lim decode keeps a tone within one mel band") {
  const Waveform x(t::Tone(440.0, 1.0), 16000);
  const auto y = afss::GriffinLimDecode(afss::MelEncode(x));
  CHECK(std::abs(static_cast<long>(y.size()) - static_cast<long>(x.size())) <= 256);
  const double peak_hz = static_cast<double>(t::PeakBin(y.samples)) * 16000.0 / 4096;
  // Width of one mel band around 440 Hz.
  const double step = afss::HzToMel(8000.0) / 81.0;
  const double band_lo = afss::MelToHz(afss::HzToMel(440.0) - step);
  const double band_hi = afss::MelToHz(afss::HzToMel(440.0) + step);
  CHECK(peak_hz >= band_lo);
  CHECK(peak_hz <= band_hi);
}

TEST_CASE("mel encode/decode is lossy and deterministic") {
  Waveform x(t::Tone(300.0, 0.6), 16000);
  const auto noise = t::WhiteNoise(x.size(), 0.05, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.samples[i] += noise[i];
  const auto a = afss::GriffinLimDecode(afss::MelEncode(x));
  const auto b = afss::GriffinLimDecode(afss::MelEncode(x));
  CHECK(a.samples == b.samples);
  double diff = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), x.size()); ++i) diff = std::max(diff, std::abs(a.samples[i] - x.samples[i]));
  CHECK(diff > 1e-3);
}

TEST_CASE("griffin-lim decode rejects empty input and zero iterations") {
  afss::MelSpectrogram empty;
  CHECK_THROWS_AS(afss::GriffinLimDecode(empty), afss::InputError);
  const auto m = afss::MelEncode(Waveform(t::Tone(200.0, 0.1), 16000));
  CHECK_THROWS_AS(afss::GriffinLimDecode(m, 0), afss::ConfigError);
}

TEST_CASE("fft rejects non power-of-two sizes and inverts forward") {
  CHECK_THROWS_AS(afss::Fft(12), afss::ConfigError);
  const afss::Fft fft(64);
  std::vector<std::complex<double>> x(64);
  const auto noise = t::WhiteNoise(64, 1.0, 5);
  for (std::size_t i = 0; i < 64; ++i) x[i] = noise[i];
  auto y = x;
  fft.Forward(y);
  // Compare a few bins against the direct DFT.
  for (std::size_t k : {0u, 1u, 17u, 32u}) {
    std::complex<double> acc;
    for (std::size_t i = 0; i < 64; ++i) acc += x[i] * std::polar(1.0, -2.0 * M_PI * double(k * i) / 64.0);
    CHECK(std::abs(acc - y[k]) < 1e-9);
  }
  fft.Inverse(y);
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(y[i] / 64.0 - x[i]) < 1e-12);
}
