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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "afss/audio.hpp"
#include "afss/rng.hpp"

namespace afss {

enum class TransformKind { kPitchShift, kTimeStretch, kTanhDistortion, kRawBoost };

inline constexpr std::array<TransformKind, 4> kAllTransformKinds = {
    TransformKind::kPitchShift, TransformKind::kTimeStretch, TransformKind::kTanhDistortion,
    TransformKind::kRawBoost};

std::string_view TransformName(TransformKind k);
// Accepts the names produced by TransformName; throws ConfigError otherwise.
TransformKind ParseTransformKind(std::string_view name);

// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool Contains(double v) const { return v >= lo && v <= hi; }
  bool Contains(const Interval& o) const { return o.lo >= lo && o.hi <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

enum class RawBoostAlgo { kConvolutive, kImpulsive, kAdditive };

std::string_view RawBoostAlgoName(RawBoostAlgo a);
RawBoostAlgo ParseRawBoostAlgo(std::string_view name);

struct RawBoostConfig {
  int n_bands = 5;
  Interval notch_hz{20.0, 8000.0};
  Interval notch_width_hz{100.0, 1000.0};
  // Depth of each notch, as attenuation in dB.
  Interval notch_gain_db{10.0, 40.0};
  // FIR length range for the notch filter (rounded up to odd).
  Interval n_coeffs{1025.0, 2049.0};
  // Extra attenuation applied to nonlinear terms x^2, x^3, ...
  Interval bias_db{5.0, 20.0};
  int nonlinear_order = 1;
  Interval snr_db{10.0, 40.0};
  // Percentage of samples hit by impulsive noise.
  double impulse_percent = 10.0;
  double impulse_gain = 2.0;
  std::vector<RawBoostAlgo> algos{RawBoostAlgo::kConvolutive, RawBoostAlgo::kAdditive};

  bool Enabled(RawBoostAlgo a) const;
  void Validate() const;
  bool operator==(const RawBoostConfig&) const = default;
};

// Per-level parameter ranges for the transform pool.
struct IntensityPreset {
  int level = 1;
  Interval pitch_shift_semitones{-0.5, 0.5};
  Interval time_stretch_rate{0.9, 1.1};
  Interval tanh_distortion_amount{0.15, 0.6};
  RawBoostConfig rawboost;

  void Validate() const;
  bool operator==(const IntensityPreset&) const = default;
};

// Level 1 is the reference setting. Level 0 keeps each interval's midpoint at
// a quarter of the level-1 width; levels 2 and 3 widen it x2 and x3, clamped
// to each parameter's valid domain.
IntensityPreset MakePreset(int level);
std::array<IntensityPreset, 4> DefaultPresetTable();

// Rate > 1 speeds playback up (shorter output). Output length is
// round(n / rate).
Waveform TimeStretch(const Waveform& w, double rate);

// Phase-vocoder stretch by 2^(semitones / 12) followed by resampling back to
// the input length.
Waveform PitchShift(const Waveform& w, double semitones);

// tanh drive with gain 10^(2 * amount), renormalized to the input RMS.
Waveform TanhDistortion(const Waveform& w, double amount);

struct NotchBand {
  double center_hz = 0.0;
  double width_hz = 0.0;
  double gain_db = 0.0;
};

// Random draws a RawBoost call made; recorded in the transform log.
struct RawBoostTrace {
  std::vector<NotchBand> notches;
  int n_taps = 0;
  int n_impulses = 0;
  std::optional<double> snr_db;
  bool renormalized = false;

  nlohmann::json ToJson() const;
};

// Multi-band notch FIR: n_bands notches drawn from cfg, one per equal-width
// slice of cfg.notch_hz, so that adjacent notches never overlap.
std::vector<double> DrawNotchFilter(const RawBoostConfig& cfg, int sample_rate, RngStream& rng,
                                    double extra_attenuation_db, std::vector<NotchBand>* bands);

// Linear convolution, output aligned to the filter's centre and cut to x.size().
std::vector<double> ConvolveSame(std::span<const double> x, std::span<const double> h);

Waveform RawBoost(const Waveform& w, const RawBoostConfig& cfg, RngStream& rng,
                  RawBoostTrace* trace = nullptr);

// A transform with its scalar parameter bound (unused for RawBoost).
struct BoundTransform {
  TransformKind kind = TransformKind::kPitchShift;
  double value = 0.0;
};

BoundTransform SampleTransform(std::span<const TransformKind> pool, const IntensityPreset& preset,
                               RngStream& rng);

struct AppliedTransform {
  Waveform output;
  nlohmann::json params;
};

AppliedTransform ApplyTransform(const BoundTransform& t, const Waveform& w, const RawBoostConfig& rawboost,
                                RngStream& rng);

}  // namespace afss
