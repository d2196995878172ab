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

#include "afss/backends.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "afss/error.hpp"
#include "afss/spectral.hpp"

namespace afss {

namespace fs = std::filesystem;

namespace {

constexpr double kLogFloor = 1e-5;

std::vector<double> LogFeatures(const MelSpectrogram& m) {
  std::vector<double> f(m.data.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::log(m.data[i] + kLogFloor);
  return f;
}

// Per-call scratch directory removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned long> counter{0};
    path_ = fs::temp_directory_path() /
            ("afss-backend-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Waveform RunExternal(const std::string& name, const std::vector<std::string>& command,
                     const std::vector<const Waveform*>& inputs) {
  if (command.empty()) throw ConfigError("backend '" + name + "' has no command");
  ScratchDir dir;
  std::vector<std::string> argv = command;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto p = dir.path() / ("in" + std::to_string(i) + ".wav");
    SaveWav(*inputs[i], p);
    argv.push_back(p.string());
  }
  const auto out = dir.path() / "out.wav";
  argv.push_back(out.string());
  const int status = RunProcess(argv);
  if (status != 0) throw BackendError("backend '" + name + "' exited with status " + std::to_string(status));
  if (!fs::exists(out)) throw BackendError("backend '" + name + "' did not write its output file");
  try {
    return Resample(LoadWav(out), kPipelineRate);
  } catch (const Error& e) {
    throw BackendError("backend '" + name + "' produced unreadable output: " + e.what());
  }
}

}  // namespace

Waveform ReferenceKnnVc(const Waveform& source, const Waveform& target_reference, int k, int griffin_lim_iters) {
  if (source.duration() < 0.5 || target_reference.duration() < 0.5)
    throw InputError("kNN conversion needs at least 0.5 s of source and target audio");
  if (k < 1) throw ConfigError("k must be positive");
  const auto src = MelEncode(source);
  const auto tgt = MelEncode(target_reference);
  if (static_cast<std::size_t>(k) > tgt.n_frames)
    throw ConfigError("target has " + std::to_string(tgt.n_frames) + " frames, fewer than k = " + std::to_string(k));

  const auto n_mels = static_cast<std::size_t>(src.n_mels);
  const auto src_f = LogFeatures(src);
  const auto tgt_f = LogFeatures(tgt);
  std::vector<double> tgt_norm(tgt.n_frames);
  for (std::size_t j = 0; j < tgt.n_frames; ++j) {
    double e = 0.0;
    for (std::size_t m = 0; m < n_mels; ++m) e += tgt_f[j * n_mels + m] * tgt_f[j * n_mels + m];
    tgt_norm[j] = std::sqrt(e);
  }

  MelSpectrogram matched = src;
  std::vector<std::pair<double, std::size_t>> dist(tgt.n_frames);
  for (std::size_t i = 0; i < src.n_frames; ++i) {
    const double* a = &src_f[i * n_mels];
    double a_norm = 0.0;
    for (std::size_t m = 0; m < n_mels; ++m) a_norm += a[m] * a[m];
    a_norm = std::sqrt(a_norm);
    for (std::size_t j = 0; j < tgt.n_frames; ++j) {
      const double* b = &tgt_f[j * n_mels];
      double dot = 0.0;
      for (std::size_t m = 0; m < n_mels; ++m) dot += a[m] * b[m];
      const double denom = a_norm * tgt_norm[j];
      dist[j] = {denom > 0.0 ? 1.0 - dot / denom : 1.0, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (std::size_t m = 0; m < n_mels; ++m) {
      double acc = 0.0;
      for (int r = 0; r < k; ++r) acc += tgt.at(dist[static_cast<std::size_t>(r)].second, m);
      matched.at(i, m) = acc / k;
    }
  }
  Waveform out = GriffinLimDecode(matched, griffin_lim_iters);
  out.samples.resize(source.size(), 0.0);
  return out;
}

Waveform KnnVcBackend::Convert(const Waveform& source, const Waveform& target_reference) const {
  return ReferenceKnnVc(source, target_reference, k_, iters_);
}

Waveform GriffinLimVocoder::Reconstruct(const Waveform& w) const {
  return GriffinLimDecode(MelEncode(w), iters_);
}

Waveform ExternalVcBackend::Convert(const Waveform& source, const Waveform& target_reference) const {
  return RunExternal(name_, command_, {&source, &target_reference});
}

Waveform ExternalVocoderBackend::Reconstruct(const Waveform& w) const {
  return RunExternal(name_, command_, {&w});
}

int RunProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw BackendError("empty command line");
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw BackendError("fork failed for '" + argv[0] + "'");
  if (pid == 0) {
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw BackendError("waitpid failed for '" + argv[0] + "'");
  }
  if (WIFEXITED(status)) {
    const int code = WEXITSTATUS(status);
    if (code == 127) throw BackendError("could not execute '" + argv[0] + "'");
    return code;
  }
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

}  // namespace afss
