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

#include "afss/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "afss/error.hpp"

namespace afss {

namespace {

bool IsPowerOfTwo(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

// Reflect-pads by `pad` on each side; falls back to zeros where the signal is
// too short to mirror.
std::vector<double> ReflectPad(std::span<const double> x, std::size_t pad) {
  const auto n = static_cast<long>(x.size());
  std::vector<double> out(x.size() + 2 * pad, 0.0);
  for (long i = 0; i < static_cast<long>(out.size()); ++i) {
    long j = i - static_cast<long>(pad);
    if (j < 0) j = -j;
    if (j >= n) j = 2 * (n - 1) - j;
    if (j >= 0 && j < n) out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
  if (!IsPowerOfTwo(n)) throw ConfigError("FFT size must be a power of two, got " + std::to_string(n));
  int bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    bitrev_[i] = r;
  }
  for (std::size_t k = 0; k < n / 2; ++k)
    twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

void Fft::Transform(std::span<std::complex<double>> x, bool inverse) const {
  for (std::size_t i = 0; i < n_; ++i)
    if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * stride];
        if (inverse) w = std::conj(w);
        const std::complex<double> u = x[start + k];
        const std::complex<double> v = x[start + k + half] * w;
        x[start + k] = u + v;
        x[start + k + half] = u - v;
      }
    }
  }
}

void Fft::Forward(std::span<std::complex<double>> x) const { Transform(x, false); }
void Fft::Inverse(std::span<std::complex<double>> x) const { Transform(x, true); }

std::vector<double> HannWindow(const StftParams& p) {
  std::vector<double> w(static_cast<std::size_t>(p.n_fft), 0.0);
  const int offset = (p.n_fft - p.win_length) / 2;
  for (int i = 0; i < p.win_length; ++i)
    w[static_cast<std::size_t>(offset + i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / p.win_length);
  return w;
}

void StftParams::Validate() const {
  if (!IsPowerOfTwo(static_cast<std::size_t>(std::max(n_fft, 0))))
    throw ConfigError("n_fft must be a power of two, got " + std::to_string(n_fft));
  if (win_length <= 0 || win_length > n_fft)
    throw ConfigError("win_length must be in [1, n_fft]");
  if (hop_length <= 0 || hop_length > win_length)
    throw ConfigError("hop_length must be in [1, win_length]");
  const auto w = HannWindow(*this);
  double lo = INFINITY, hi = 0.0;
  for (int r = 0; r < hop_length; ++r) {
    double acc = 0.0;
    for (int i = r; i < n_fft; i += hop_length) acc += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    lo = std::min(lo, acc);
    hi = std::max(hi, acc);
  }
  if (!(lo > 1e-10 * hi))
    throw ConfigError("window/hop combination does not satisfy overlap-add (hop " +
                      std::to_string(hop_length) + ", win " + std::to_string(win_length) + ")");
}

ComplexSpectrogram Stft(const Waveform& w, const StftParams& p) {
  p.Validate();
  const auto n_fft = static_cast<std::size_t>(p.n_fft);
  const auto hop = static_cast<std::size_t>(p.hop_length);
  const auto padded = ReflectPad(w.samples, n_fft / 2);
  const auto window = HannWindow(p);
  const Fft fft(n_fft);

  ComplexSpectrogram s;
  s.params = p;
  s.sample_rate = w.sample_rate;
  s.n_bins = static_cast<std::size_t>(p.n_bins());
  s.n_frames = w.samples.size() / hop + 1;
  s.data.resize(s.n_frames * s.n_bins);
  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t t = 0; t < s.n_frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      const std::size_t idx = start + i;
      buf[i] = idx < padded.size() ? padded[idx] * window[i] : 0.0;
    }
    fft.Forward(buf);
    std::copy_n(buf.begin(), s.n_bins, s.data.begin() + static_cast<long>(t * s.n_bins));
  }
  return s;
}

Waveform Istft(const ComplexSpectrogram& s, std::optional<std::size_t> length) {
  s.params.Validate();
  const auto n_fft = static_cast<std::size_t>(s.params.n_fft);
  const auto hop = static_cast<std::size_t>(s.params.hop_length);
  if (s.n_bins != n_fft / 2 + 1) throw ConfigError("spectrogram bin count does not match n_fft");
  const auto window = HannWindow(s.params);
  const Fft fft(n_fft);

  const std::size_t full = n_fft + hop * (s.n_frames == 0 ? 0 : s.n_frames - 1);
  std::vector<double> acc(full, 0.0), wss(full, 0.0);
  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t t = 0; t < s.n_frames; ++t) {
    for (std::size_t k = 0; k < s.n_bins; ++k) buf[k] = s.at(t, k);
    for (std::size_t k = s.n_bins; k < n_fft; ++k) buf[k] = std::conj(buf[n_fft - k]);
    fft.Inverse(buf);
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      acc[start + i] += buf[i].real() / static_cast<double>(n_fft) * window[i];
      wss[start + i] += window[i] * window[i];
    }
  }
  const std::size_t out_len = length.value_or(s.n_frames == 0 ? 0 : (s.n_frames - 1) * hop);
  Waveform out;
  out.sample_rate = s.sample_rate;
  out.samples.assign(out_len, 0.0);
  const std::size_t offset = n_fft / 2;
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = i + offset;
    if (j < full && wss[j] > 1e-10) out.samples[i] = acc[j] / wss[j];
  }
  return out;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> MelFilterbank(int sample_rate, int n_fft, int n_mels) {
  if (n_mels <= 0) throw ConfigError("n_mels must be positive");
  const int n_bins = n_fft / 2 + 1;
  const double mel_max = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = MelToHz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  std::vector<double> fb(static_cast<std::size_t>(n_mels) * static_cast<std::size_t>(n_bins), 0.0);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double v = 0.0;
      if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
      fb[static_cast<std::size_t>(m) * static_cast<std::size_t>(n_bins) + static_cast<std::size_t>(k)] = v;
    }
  }
  return fb;
}

MelSpectrogram MelEncode(const Waveform& w, int n_mels, int n_fft, int hop_length) {
  StftParams p{n_fft, hop_length, n_fft};
  const auto spec = Stft(w, p);
  const auto fb = MelFilterbank(w.sample_rate, n_fft, n_mels);
  MelSpectrogram m;
  m.n_frames = spec.n_frames;
  m.n_mels = n_mels;
  m.params = p;
  m.sample_rate = w.sample_rate;
  m.data.assign(m.n_frames * static_cast<std::size_t>(n_mels), 0.0);
  std::vector<double> mag(spec.n_bins);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    for (std::size_t k = 0; k < spec.n_bins; ++k) mag[k] = std::abs(spec.at(t, k));
    for (std::size_t b = 0; b < static_cast<std::size_t>(n_mels); ++b) {
      const double* row = fb.data() + b * spec.n_bins;
      double acc = 0.0;
      for (std::size_t k = 0; k < spec.n_bins; ++k) acc += row[k] * mag[k];
      m.at(t, b) = acc;
    }
  }
  return m;
}

std::vector<double> MelToLinear(const MelSpectrogram& m) {
  const int n_bins = m.params.n_bins();
  const auto fb = MelFilterbank(m.sample_rate, m.params.n_fft, m.n_mels);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> basis(
      fb.data(), m.n_mels, n_bins);
  const Eigen::MatrixXd pinv = Eigen::MatrixXd(basis).completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mel(
      m.data.data(), static_cast<Eigen::Index>(m.n_frames), m.n_mels);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> lin = mel * pinv.transpose();
  lin = lin.cwiseMax(0.0);
  return {lin.data(), lin.data() + lin.size()};
}

Waveform GriffinLim(std::span<const double> magnitudes, std::size_t n_frames, const StftParams& p,
                    int sample_rate, int n_iters) {
  if (n_iters < 1) throw ConfigError("Griffin-Lim needs at least one iteration");
  ComplexSpectrogram spec;
  spec.params = p;
  spec.sample_rate = sample_rate;
  spec.n_frames = n_frames;
  spec.n_bins = static_cast<std::size_t>(p.n_bins());
  if (magnitudes.size() != spec.n_frames * spec.n_bins)
    throw ConfigError("magnitude matrix does not match frame/bin counts");
  spec.data.resize(magnitudes.size());
  for (std::size_t i = 0; i < magnitudes.size(); ++i) spec.data[i] = magnitudes[i];

  for (int it = 0; it < n_iters; ++it) {
    const auto rebuilt = Stft(Istft(spec), p);
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
      const double a = std::abs(rebuilt.data[i]);
      spec.data[i] = a > 0.0 ? rebuilt.data[i] * (magnitudes[i] / a) : std::complex<double>(magnitudes[i], 0.0);
    }
  }
  return Istft(spec);
}

Waveform GriffinLimDecode(const MelSpectrogram& m, int n_iters) {
  if (m.n_frames == 0 || m.data.empty()) throw InputError("cannot decode an empty mel spectrogram");
  const auto lin = MelToLinear(m);
  return GriffinLim(lin, m.n_frames, m.params, m.sample_rate, n_iters);
}

}  // namespace afss
