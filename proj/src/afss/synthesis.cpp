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

#include "afss/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "afss/parallel.hpp"

namespace afss {

namespace fs = std::filesystem;

namespace {

void RequireAudible(const Waveform& w) {
  if (Rms(w.samples) <= kSilenceRms) throw SilentInputError("input is silent (RMS <= 1e-5)");
}

std::string RelativePath(const fs::path& target, const fs::path& base) {
  return fs::absolute(target).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal()).generic_string();
}

}  // namespace

std::string_view SynthesisModeName(SynthesisMode m) { return m == SynthesisMode::kAfss ? "afss" : "cross_vc"; }

SynthesisMode ParseSynthesisMode(std::string_view s) {
  if (s == "afss") return SynthesisMode::kAfss;
  if (s == "cross_vc") return SynthesisMode::kCrossVc;
  throw ConfigError("unknown synthesis mode '" + std::string(s) + "' (expected afss|cross_vc)");
}

SynthesisOutput SelfConvert(const Waveform& x_b, const std::string& speaker_id, const IntensityPreset& preset,
                            const VcBackend& vc, RngStream& rng) {
  RequireAudible(x_b);
  RngStream select = rng.Derive("select");
  RngStream apply = rng.Derive("apply");
  const auto bound = SampleTransform(kAllTransformKinds, preset, select);
  const auto applied = ApplyTransform(bound, x_b, preset.rawboost, apply);
  SynthesisOutput out;
  out.audio = vc.Convert(x_b, applied.output);
  out.speaker_id = speaker_id;
  out.source_speaker_id = speaker_id;
  out.transform_log.push_back({{"stage", "pre_vc"},
                               {"kind", TransformName(bound.kind)},
                               {"params", applied.params},
                               {"backend", vc.name()}});
  return out;
}

SynthesisOutput SelfReconstruct(const Waveform& x_b, const std::string& speaker_id, const RawBoostConfig& cfg,
                                const VocoderBackend& voc, RngStream& rng) {
  RngStream boost = rng.Derive("post_rec");
  RawBoostTrace trace;
  SynthesisOutput out;
  out.audio = RawBoost(voc.Reconstruct(x_b), cfg, boost, &trace);
  out.speaker_id = speaker_id;
  out.source_speaker_id = speaker_id;
  out.transform_log.push_back({{"stage", "post_rec"},
                               {"kind", TransformName(TransformKind::kRawBoost)},
                               {"params", trace.ToJson()},
                               {"backend", voc.name()}});
  return out;
}

SynthesisOutput CrossConvert(const Waveform& x_b, const std::string& source_speaker_id, const SampleRecord& target,
                             const Waveform& target_audio, const VcBackend& vc) {
  if (target.speaker_id == source_speaker_id)
    throw InputError("cross-speaker conversion needs a different target speaker (both are '" +
                     source_speaker_id + "')");
  SynthesisOutput out;
  out.audio = vc.Convert(x_b, target_audio);
  out.speaker_id = target.speaker_id;
  out.source_speaker_id = source_speaker_id;
  out.transform_log.push_back({{"stage", "cross_vc"},
                               {"backend", vc.name()},
                               {"target", target.utterance_id},
                               {"source_speaker", source_speaker_id},
                               {"target_speaker", target.speaker_id}});
  return out;
}

CorpusResult GenerateCorpus(const Manifest& reals, const SynthesisBackends& backends, const CorpusOptions& opts,
                            const fs::path& audio_dir, const fs::path& manifest_dir) {
  if (reals.records.empty()) throw ValidationError("real manifest is empty");
  std::string bad;
  for (std::size_t i = 0; i < reals.records.size(); ++i) {
    const SampleRecord& r = reals.records[i];
    if (r.label != Label::kReal || r.provenance != Provenance::kReal)
      bad += "  " + reals.Where(i) + r.utterance_id + " is labeled " + std::string(LabelName(r.label)) + "\n";
  }
  if (!bad.empty()) throw ValidationError("synthesis input must contain only bonafide records:\n" + bad);
  if (!backends.vc) throw ConfigError("no voice conversion backend configured");
  if (opts.mode == SynthesisMode::kAfss && backends.vocoders.empty() && opts.branch_ratio < 1.0)
    throw ConfigError("self-reconstruction needs at least one vocoder backend");
  if (!(opts.branch_ratio >= 0.0 && opts.branch_ratio <= 1.0)) throw ConfigError("branch_ratio must be in [0, 1]");
  opts.preset.Validate();

  // Cross mode: every record needs at least one other-speaker candidate.
  if (opts.mode == SynthesisMode::kCrossVc) {
    const auto& first = reals.records.front().speaker_id;
    const bool multi = std::any_of(reals.records.begin(), reals.records.end(),
                                   [&](const auto& r) { return r.speaker_id != first; });
    if (!multi) throw ConfigError("cross_vc mode needs at least two speakers");
  }

  fs::create_directories(audio_dir);
  const std::size_t n = reals.records.size();
  std::vector<std::optional<SampleRecord>> produced(n);
  std::vector<std::optional<CorpusFailure>> failed(n);

  auto process = [&](std::size_t i) {
    const auto& rec = reals.records[i];
    try {
      const Waveform x_b = LoadPipelineAudio(reals, rec);
      RequireAudible(x_b);
      SynthesisOutput out;
      Provenance prov;
      if (opts.mode == SynthesisMode::kAfss) {
        RngStream branch(opts.seed, rec.utterance_id, "branch");
        const bool convert = branch.Uniform() < opts.branch_ratio;
        if (convert) {
          RngStream rng(opts.seed, rec.utterance_id, "self_vc");
          out = SelfConvert(x_b, rec.speaker_id, opts.preset, *backends.vc, rng);
          prov = Provenance::kSelfVc;
        } else {
          const auto& voc = *backends.vocoders[branch.Index(backends.vocoders.size())];
          RngStream rng(opts.seed, rec.utterance_id, "self_rec");
          out = SelfReconstruct(x_b, rec.speaker_id, opts.preset.rawboost, voc, rng);
          prov = Provenance::kSelfRec;
        }
      } else {
        std::vector<std::size_t> candidates;
        for (std::size_t j = 0; j < n; ++j)
          if (reals.records[j].speaker_id != rec.speaker_id) candidates.push_back(j);
        RngStream pick(opts.seed, rec.utterance_id, "cross_target");
        const auto& target = reals.records[candidates[pick.Index(candidates.size())]];
        out = CrossConvert(x_b, rec.speaker_id, target, LoadPipelineAudio(reals, target), *backends.vc);
        prov = Provenance::kCrossVc;
      }
      for (double s : out.audio.samples)
        if (!std::isfinite(s)) throw BackendError("backend produced non-finite samples");
      SampleRecord fake;
      fake.utterance_id = FakeUtteranceId(rec.utterance_id, prov);
      const auto wav = audio_dir / (fake.utterance_id + ".wav");
      SaveWav(out.audio, wav);
      fake.path = RelativePath(wav, manifest_dir);
      fake.label = Label::kFake;
      fake.speaker_id = out.speaker_id;
      fake.provenance = prov;
      fake.transform_log = std::move(out.transform_log);
      produced[i] = std::move(fake);
    } catch (const std::exception& e) {
      failed[i] = CorpusFailure{rec.utterance_id, e.what()};
    }
  };

  ParallelFor(n, opts.workers, process);

  CorpusResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (produced[i]) result.fakes.push_back(std::move(*produced[i]));
    if (failed[i]) result.failures.push_back(std::move(*failed[i]));
  }
  if (static_cast<double>(result.failures.size()) > opts.max_failure_ratio * static_cast<double>(n)) {
    std::string msg = "synthesis aborted: " + std::to_string(result.failures.size()) + " of " + std::to_string(n) +
                      " utterances failed";
    for (const auto& f : result.failures) msg += "\n  " + f.utterance_id + ": " + f.reason;
    throw Error(msg);
  }
  return result;
}

}  // namespace afss
