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

#include "afss/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "afss/error.hpp"
#include "afss/spectral.hpp"

namespace afss {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Phase vocoder analysis geometry.
const StftParams kVocoderParams{1024, 256, 1024};

double WrapPhase(double x) { return x - kTwoPi * std::round(x / kTwoPi); }

Interval ScaleAround(const Interval& base, double factor, const Interval& domain) {
  const double half = 0.5 * base.width() * factor;
  return {std::max(domain.lo, base.mid() - half), std::min(domain.hi, base.mid() + half)};
}

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::string_view TransformName(TransformKind k) {
  switch (k) {
    case TransformKind::kPitchShift: return "PitchShift";
    case TransformKind::kTimeStretch: return "TimeStretch";
    case TransformKind::kTanhDistortion: return "TanhDistortion";
    case TransformKind::kRawBoost: return "RawBoost";
  }
  return "?";
}

TransformKind ParseTransformKind(std::string_view name) {
  for (auto k : kAllTransformKinds)
    if (TransformName(k) == name) return k;
  throw ConfigError("unknown transform kind '" + std::string(name) + "'");
}

std::string_view RawBoostAlgoName(RawBoostAlgo a) {
  switch (a) {
    case RawBoostAlgo::kConvolutive: return "convolutive";
    case RawBoostAlgo::kImpulsive: return "impulsive";
    case RawBoostAlgo::kAdditive: return "additive";
  }
  return "?";
}

RawBoostAlgo ParseRawBoostAlgo(std::string_view name) {
  for (auto a : {RawBoostAlgo::kConvolutive, RawBoostAlgo::kImpulsive, RawBoostAlgo::kAdditive})
    if (RawBoostAlgoName(a) == name) return a;
  throw ConfigError("unknown RawBoost algorithm '" + std::string(name) + "'");
}

bool RawBoostConfig::Enabled(RawBoostAlgo a) const {
  return std::find(algos.begin(), algos.end(), a) != algos.end();
}

void RawBoostConfig::Validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid RawBoost config: ") + what);
  };
  check(n_bands >= 1, "n_bands must be >= 1");
  check(notch_hz.lo >= 0.0 && notch_hz.lo < notch_hz.hi, "notch frequency range");
  check(notch_width_hz.lo > 0.0 && notch_width_hz.lo <= notch_width_hz.hi, "notch width range");
  check(notch_gain_db.lo >= 0.0 && notch_gain_db.lo <= notch_gain_db.hi, "notch gain range");
  check(n_coeffs.lo >= 3.0 && n_coeffs.lo <= n_coeffs.hi, "coefficient count range");
  check(bias_db.lo <= bias_db.hi, "bias range");
  check(nonlinear_order >= 1, "nonlinear_order must be >= 1");
  check(snr_db.lo <= snr_db.hi, "SNR range must be non-empty");
  check(impulse_percent >= 0.0 && impulse_percent <= 100.0, "impulse percentage must be in [0, 100]");
  check((notch_hz.width() / n_bands) > notch_width_hz.hi, "notch widths exceed per-band frequency slice");
}

void IntensityPreset::Validate() const {
  if (level < 0 || level > 3) throw ConfigError("intensity level must be in 0..3");
  if (pitch_shift_semitones.lo > pitch_shift_semitones.hi || pitch_shift_semitones.lo < -12.0 ||
      pitch_shift_semitones.hi > 12.0)
    throw ConfigError("pitch shift range must lie within [-12, 12] semitones");
  if (time_stretch_rate.lo > time_stretch_rate.hi || time_stretch_rate.lo <= 0.0)
    throw ConfigError("time stretch range must be positive");
  if (tanh_distortion_amount.lo > tanh_distortion_amount.hi || tanh_distortion_amount.lo < 0.0 ||
      tanh_distortion_amount.hi > 1.0)
    throw ConfigError("tanh distortion range must lie within [0, 1]");
  rawboost.Validate();
}

IntensityPreset MakePreset(int level) {
  if (level < 0 || level > 3) throw ConfigError("intensity level must be in 0..3");
  IntensityPreset base;  // level 1
  if (level == 1) return base;
  const double factor = level == 0 ? 0.25 : static_cast<double>(level);
  IntensityPreset p = base;
  p.level = level;
  p.pitch_shift_semitones = ScaleAround(base.pitch_shift_semitones, factor, {-12.0, 12.0});
  p.time_stretch_rate = ScaleAround(base.time_stretch_rate, factor, {0.05, 20.0});
  p.tanh_distortion_amount = ScaleAround(base.tanh_distortion_amount, factor, {0.0, 1.0});
  return p;
}

std::array<IntensityPreset, 4> DefaultPresetTable() {
  return {MakePreset(0), MakePreset(1), MakePreset(2), MakePreset(3)};
}

Waveform TimeStretch(const Waveform& w, double rate) {
  if (!(rate > 0.0)) throw InputError("time stretch rate must be positive");
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(w.size()) / rate));
  if (rate == 1.0 || w.empty()) {
    Waveform out = w;
    out.samples.resize(out_len, 0.0);
    return out;
  }
  const auto spec = Stft(w, kVocoderParams);
  const std::size_t n_bins = spec.n_bins;
  const double hop = kVocoderParams.hop_length;

  const auto needed = out_len / static_cast<std::size_t>(kVocoderParams.hop_length) + 1;
  ComplexSpectrogram out;
  out.params = kVocoderParams;
  out.sample_rate = w.sample_rate;
  out.n_bins = n_bins;
  out.n_frames = needed;
  out.data.assign(out.n_frames * n_bins, {0.0, 0.0});

  auto column = [&](std::size_t t, std::size_t k) -> std::complex<double> {
    return t < spec.n_frames ? spec.at(t, k) : std::complex<double>{0.0, 0.0};
  };
  std::vector<double> phase(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) phase[k] = std::arg(spec.at(0, k));

  for (std::size_t t = 0; t < out.n_frames; ++t) {
    const double step = static_cast<double>(t) * rate;
    const auto i0 = static_cast<std::size_t>(step);
    const double alpha = step - static_cast<double>(i0);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const auto c0 = column(i0, k);
      const auto c1 = column(i0 + 1, k);
      const double mag = (1.0 - alpha) * std::abs(c0) + alpha * std::abs(c1);
      out.at(t, k) = std::polar(mag, phase[k]);
      const double advance = kTwoPi * hop * static_cast<double>(k) / kVocoderParams.n_fft;
      const double dphi = WrapPhase(std::arg(c1) - std::arg(c0) - advance);
      phase[k] += advance + dphi;
    }
  }
  return Istft(out, out_len);
}

Waveform PitchShift(const Waveform& w, double semitones) {
  if (std::abs(semitones) > 12.0) throw InputError("pitch shift limited to +/-12 semitones");
  if (semitones == 0.0 || w.empty()) return w;
  const double factor = std::pow(2.0, semitones / 12.0);
  const Waveform stretched = TimeStretch(w, 1.0 / factor);
  return Waveform(ResampleToLength(stretched.samples, w.size()), w.sample_rate);
}

Waveform TanhDistortion(const Waveform& w, double amount) {
  if (!(amount >= 0.0 && amount <= 1.0)) throw InputError("tanh distortion amount must be in [0, 1]");
  const double gain = std::pow(10.0, 2.0 * amount);
  Waveform out = w;
  for (double& s : out.samples) s = std::tanh(gain * s);
  const double in_rms = Rms(w.samples);
  const double out_rms = Rms(out.samples);
  if (out_rms > 0.0) {
    const double scale = in_rms / out_rms;
    for (double& s : out.samples) s *= scale;
  }
  return out;
}

nlohmann::json RawBoostTrace::ToJson() const {
  nlohmann::json j = nlohmann::json::object();
  if (!notches.empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& n : notches) arr.push_back({n.center_hz, n.width_hz, n.gain_db});
    j["notches"] = std::move(arr);
    j["n_taps"] = n_taps;
  }
  if (n_impulses > 0) j["n_impulses"] = n_impulses;
  if (snr_db) j["snr_db"] = *snr_db;
  if (renormalized) j["renormalized"] = true;
  return j;
}

std::vector<double> ConvolveSame(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return std::vector<double>(x.size(), 0.0);
  const std::size_t full = x.size() + h.size() - 1;
  const std::size_t n = NextPow2(full);
  const Fft fft(n);
  std::vector<std::complex<double>> a(n), b(n);
  std::copy(x.begin(), x.end(), a.begin());
  std::copy(h.begin(), h.end(), b.begin());
  fft.Forward(a);
  fft.Forward(b);
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
  fft.Inverse(a);
  const std::size_t delay = (h.size() - 1) / 2;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = a[i + delay].real() / static_cast<double>(n);
  return y;
}

std::vector<double> DrawNotchFilter(const RawBoostConfig& cfg, int sample_rate, RngStream& rng,
                                    double extra_attenuation_db, std::vector<NotchBand>* bands) {
  const double nyquist = sample_rate / 2.0;
  auto taps = static_cast<int>(rng.UniformInt(static_cast<long>(cfg.n_coeffs.lo), static_cast<long>(cfg.n_coeffs.hi)));
  if (taps % 2 == 0) ++taps;

  const std::size_t grid = NextPow2(static_cast<std::size_t>(4 * taps));
  std::vector<double> response(grid / 2 + 1, std::pow(10.0, -extra_attenuation_db / 20.0));
  const double slice = cfg.notch_hz.width() / cfg.n_bands;
  for (int b = 0; b < cfg.n_bands; ++b) {
    NotchBand band;
    band.width_hz = rng.Uniform(cfg.notch_width_hz.lo, cfg.notch_width_hz.hi);
    // Centre stays inside its own slice with the full notch width, so notches
    // are separated by at least the slice slack.
    const double lo = cfg.notch_hz.lo + slice * b + band.width_hz / 2.0;
    const double hi = cfg.notch_hz.lo + slice * (b + 1) - band.width_hz / 2.0;
    band.center_hz = rng.Uniform(lo, std::max(lo, hi));
    band.gain_db = rng.Uniform(cfg.notch_gain_db.lo, cfg.notch_gain_db.hi);
    const double f1 = std::max(0.0, band.center_hz - band.width_hz / 2.0);
    const double f2 = std::min(nyquist, band.center_hz + band.width_hz / 2.0);
    const double depth = std::pow(10.0, -band.gain_db / 20.0);
    for (std::size_t k = 0; k < response.size(); ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(grid);
      if (f >= f1 && f <= f2) response[k] = std::min(response[k], depth * std::pow(10.0, -extra_attenuation_db / 20.0));
    }
    if (bands) bands->push_back(band);
  }

  // Zero-phase frequency sampling, truncated with a Hamming window.
  const Fft fft(grid);
  std::vector<std::complex<double>> buf(grid);
  for (std::size_t k = 0; k < response.size(); ++k) buf[k] = response[k];
  for (std::size_t k = response.size(); k < grid; ++k) buf[k] = buf[grid - k];
  fft.Inverse(buf);
  std::vector<double> h(static_cast<std::size_t>(taps));
  const int half = taps / 2;
  for (int i = 0; i < taps; ++i) {
    const int lag = i - half;
    const std::size_t idx = static_cast<std::size_t>((lag + static_cast<long>(grid)) % static_cast<long>(grid));
    const double win = 0.54 - 0.46 * std::cos(kTwoPi * i / (taps - 1));
    h[static_cast<std::size_t>(i)] = buf[idx].real() / static_cast<double>(grid) * win;
  }
  return h;
}

Waveform RawBoost(const Waveform& w, const RawBoostConfig& cfg, RngStream& rng, RawBoostTrace* trace) {
  cfg.Validate();
  RawBoostTrace local;
  RawBoostTrace& tr = trace ? *trace : local;
  tr = RawBoostTrace{};
  Waveform out = w;
  if (w.empty()) return out;

  if (cfg.Enabled(RawBoostAlgo::kConvolutive)) {
    RngStream conv = rng.Derive("convolutive");
    std::vector<double> acc(w.size(), 0.0);
    std::vector<double> power(w.size());
    for (int order = 1; order <= cfg.nonlinear_order; ++order) {
      const double bias = order == 1 ? 0.0 : conv.Uniform(cfg.bias_db.lo, cfg.bias_db.hi);
      for (std::size_t i = 0; i < w.size(); ++i) power[i] = std::pow(out.samples[i], order);
      std::vector<NotchBand>* bands = order == 1 ? &tr.notches : nullptr;
      const auto h = DrawNotchFilter(cfg, w.sample_rate, conv, bias, bands);
      if (order == 1) tr.n_taps = static_cast<int>(h.size());
      const auto y = ConvolveSame(power, h);
      for (std::size_t i = 0; i < w.size(); ++i) acc[i] += y[i];
    }
    out.samples = std::move(acc);
  }

  if (cfg.Enabled(RawBoostAlgo::kImpulsive)) {
    RngStream isd = rng.Derive("impulsive");
    const auto n = static_cast<std::size_t>(std::floor(static_cast<double>(w.size()) * cfg.impulse_percent / 100.0));
    std::vector<std::size_t> idx(w.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + isd.Index(w.size() - i)]);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = (2.0 * isd.Uniform() - 1.0) * (2.0 * isd.Uniform() - 1.0);
      out.samples[idx[i]] += cfg.impulse_gain * out.samples[idx[i]] * f;
    }
    tr.n_impulses = static_cast<int>(n);
  }

  if (cfg.Enabled(RawBoostAlgo::kAdditive)) {
    RngStream ssi = rng.Derive("additive");
    const double snr = ssi.Uniform(cfg.snr_db.lo, cfg.snr_db.hi);
    std::vector<double> noise(w.size());
    for (double& v : noise) v = ssi.Normal();
    const auto h = DrawNotchFilter(cfg, w.sample_rate, ssi, 0.0, nullptr);
    noise = ConvolveSame(noise, h);
    const double signal_norm = std::sqrt(Energy(out.samples));
    const double noise_norm = std::sqrt(Energy(noise));
    // Zero-power input has no defined SNR; nothing is added.
    if (signal_norm > 0.0 && noise_norm > 0.0) {
      const double scale = signal_norm / noise_norm / std::pow(10.0, snr / 20.0);
      for (std::size_t i = 0; i < w.size(); ++i) out.samples[i] += scale * noise[i];
      tr.snr_db = snr;
    }
  }

  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 1.0) {
    for (double& s : out.samples) s /= peak;
    tr.renormalized = true;
  }
  return out;
}

BoundTransform SampleTransform(std::span<const TransformKind> pool, const IntensityPreset& preset, RngStream& rng) {
  if (pool.empty()) throw ConfigError("transform pool is empty");
  BoundTransform t;
  t.kind = pool[rng.Index(pool.size())];
  switch (t.kind) {
    case TransformKind::kPitchShift:
      t.value = rng.Uniform(preset.pitch_shift_semitones.lo, preset.pitch_shift_semitones.hi);
      break;
    case TransformKind::kTimeStretch:
      t.value = rng.Uniform(preset.time_stretch_rate.lo, preset.time_stretch_rate.hi);
      break;
    case TransformKind::kTanhDistortion:
      t.value = rng.Uniform(preset.tanh_distortion_amount.lo, preset.tanh_distortion_amount.hi);
      break;
    case TransformKind::kRawBoost:
      break;
  }
  return t;
}

AppliedTransform ApplyTransform(const BoundTransform& t, const Waveform& w, const RawBoostConfig& rawboost,
                                RngStream& rng) {
  switch (t.kind) {
    case TransformKind::kPitchShift:
      return {PitchShift(w, t.value), {{"semitones", t.value}}};
    case TransformKind::kTimeStretch:
      return {TimeStretch(w, t.value), {{"rate", t.value}}};
    case TransformKind::kTanhDistortion:
      return {TanhDistortion(w, t.value), {{"amount", t.value}}};
    case TransformKind::kRawBoost: {
      RawBoostTrace trace;
      auto out = RawBoost(w, rawboost, rng, &trace);
      return {std::move(out), trace.ToJson()};
    }
  }
  throw ConfigError("unhandled transform kind");
}

}  // namespace afss
