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

#include <memory>
#include <string>
#include <vector>

#include "afss/audio.hpp"

namespace afss {

// Voice conversion: re-voice `source` to sound like `target_reference`.
// Implementations must be safe to call concurrently (const, no shared state).
class VcBackend {
 public:
  virtual ~VcBackend() = default;
  virtual std::string name() const = 0;
  virtual Waveform Convert(const Waveform& source, const Waveform& target_reference) const = 0;
};

// Analysis/resynthesis vocoder. Output length stays within one hop of the
// input.
class VocoderBackend {
 public:
  virtual ~VocoderBackend() = default;
  virtual std::string name() const = 0;
  virtual Waveform Reconstruct(const Waveform& w) const = 0;
};

// Frame-level kNN matcher over log-mel features with Griffin-Lim resynthesis:
// each source frame is replaced by the mean mel frame of its k nearest target
// frames under cosine distance. Inputs must be at least 0.5 s long; throws
// ConfigError when the target has fewer than k frames.
Waveform ReferenceKnnVc(const Waveform& source, const Waveform& target_reference, int k = 4,
                        int griffin_lim_iters = 32);

class KnnVcBackend final : public VcBackend {
 public:
  explicit KnnVcBackend(int k = 4, int griffin_lim_iters = 32) : k_(k), iters_(griffin_lim_iters) {}
  std::string name() const override { return "knn"; }
  Waveform Convert(const Waveform& source, const Waveform& target_reference) const override;

 private:
  int k_;
  int iters_;
};

// Returns the source unchanged; useful as a degenerate backend in tests.
class IdentityVcBackend final : public VcBackend {
 public:
  std::string name() const override { return "identity"; }
  Waveform Convert(const Waveform& source, const Waveform&) const override { return source; }
};

// mel_encode followed by Griffin-Lim decoding, using the pipeline's default
// analysis settings.
class GriffinLimVocoder final : public VocoderBackend {
 public:
  explicit GriffinLimVocoder(int n_iters = 32) : iters_(n_iters) {}
  std::string name() const override { return "griffin_lim"; }
  Waveform Reconstruct(const Waveform& w) const override;

 private:
  int iters_;
};

// Subprocess plug-in protocol: the program is run as
//   <program> <args...> <input.wav> [<reference.wav>] <output.wav>
// and must write a WAV to the output path and exit 0. Output is brought back
// to the pipeline rate.
class ExternalVcBackend final : public VcBackend {
 public:
  ExternalVcBackend(std::string name, std::vector<std::string> command)
      : name_(std::move(name)), command_(std::move(command)) {}
  std::string name() const override { return name_; }
  Waveform Convert(const Waveform& source, const Waveform& target_reference) const override;

 private:
  std::string name_;
  std::vector<std::string> command_;
};

class ExternalVocoderBackend final : public VocoderBackend {
 public:
  ExternalVocoderBackend(std::string name, std::vector<std::string> command)
      : name_(std::move(name)), command_(std::move(command)) {}
  std::string name() const override { return name_; }
  Waveform Reconstruct(const Waveform& w) const override;

 private:
  std::string name_;
  std::vector<std::string> command_;
};

// Runs argv[0] with argv, waiting for completion. Returns the exit status, or
// throws BackendError if the program could not be started.
int RunProcess(const std::vector<std::string>& argv);

}  // namespace afss
