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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "afss/audio.hpp"
#include "afss/backends.hpp"
#include "afss/error.hpp"
#include "afss/manifest.hpp"
#include "afss/rng.hpp"
#include "afss/transforms.hpp"

namespace afss {

// Raised for inputs the generator skips rather than converts (near-silent).
class SilentInputError : public InputError {
 public:
  using InputError::InputError;
};

inline constexpr double kSilenceRms = 1e-5;

struct SynthesisOutput {
  Waveform audio;
  nlohmann::json transform_log = nlohmann::json::array();
  std::string speaker_id;         // identity of the produced voice
  std::string source_speaker_id;  // identity of the input audio
};

// Self-conversion: one transform drawn uniformly from all four kinds with the
// preset's ranges is applied to x_b to build the target reference x_t, then
// x_b is converted toward x_t. Both speaker ids are `speaker_id`.
SynthesisOutput SelfConvert(const Waveform& x_b, const std::string& speaker_id, const IntensityPreset& preset,
                            const VcBackend& vc, RngStream& rng);

// Self-reconstruction: vocoder round trip followed by RawBoost only.
SynthesisOutput SelfReconstruct(const Waveform& x_b, const std::string& speaker_id, const RawBoostConfig& cfg,
                                const VocoderBackend& voc, RngStream& rng);

// Cross-speaker baseline. Throws InputError when both speakers match.
SynthesisOutput CrossConvert(const Waveform& x_b, const std::string& source_speaker_id,
                             const SampleRecord& target, const Waveform& target_audio, const VcBackend& vc);

enum class SynthesisMode { kAfss, kCrossVc };

std::string_view SynthesisModeName(SynthesisMode m);
SynthesisMode ParseSynthesisMode(std::string_view s);

struct SynthesisBackends {
  std::shared_ptr<const VcBackend> vc;
  std::vector<std::shared_ptr<const VocoderBackend>> vocoders;
};

struct CorpusOptions {
  SynthesisMode mode = SynthesisMode::kAfss;
  double branch_ratio = 0.5;
  IntensityPreset preset = MakePreset(1);
  std::uint64_t seed = 0;
  int workers = 1;
  double max_failure_ratio = 0.01;
};

struct CorpusFailure {
  std::string utterance_id;
  std::string reason;
};

struct CorpusResult {
  std::vector<SampleRecord> fakes;
  std::vector<CorpusFailure> failures;
};

// Turns every real record into one pseudo-fake. WAVs go to `audio_dir`; record
// paths are written relative to `manifest_dir`. Per-sample failures are
// collected and skipped; if more than max_failure_ratio of the corpus fails
// the run throws. Output order follows the input manifest.
CorpusResult GenerateCorpus(const Manifest& reals, const SynthesisBackends& backends, const CorpusOptions& opts,
                            const std::filesystem::path& audio_dir, const std::filesystem::path& manifest_dir);

}  // namespace afss
