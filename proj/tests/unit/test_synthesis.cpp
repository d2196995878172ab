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
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "afss/backends.hpp"
#include "afss/error.hpp"
#include "afss/spectral.hpp"
#include "afss/synthesis.hpp"
#include "afss/toy_corpus.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using afss::RngStream;
using afss::Waveform;
namespace t = afss::testing;

namespace {

fs::path FreshDir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "afss_test_synthesis" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path WriteScript(const fs::path& dir, const std::string& name, const std::string& body) {
  const auto p = dir / name;
  std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
  fs::permissions(p, fs::perms::owner_all);
  return p;
}

double LogMelDistance(const Waveform& a, const Waveform& b) {
  const auto ma = afss::MelEncode(a);
  const auto mb = afss::MelEncode(b);
  const std::size_t n = std::min(ma.data.size(), mb.data.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::log(ma.data[i] + 1e-5) - std::log(mb.data[i] + 1e-5);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

afss::SynthesisBackends ReferenceBackends() {
  return {std::make_shared<afss::KnnVcBackend>(), {std::make_shared<afss::GriffinLimVocoder>()}};
}

Waveform Speech(int speaker, const std::string& id, double seconds = 1.0) {
  RngStream rng(1, id, "toy");
  return afss::SynthesizeToyUtterance(afss::MakeToySpeaker(speaker, 1), seconds, rng);
}

}  // namespace

TEST_CASE("knn vc: self-match with k = 1 reduces to the vocoder round trip") {
  const auto x = Speech(2, "a");
  const auto y = afss::ReferenceKnnVc(x, x, 1);
  auto gl = afss::GriffinLimDecode(afss::MelEncode(x));
  gl.samples.resize(x.size(), 0.0);
  REQUIRE(y.size() == x.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y.samples[i] - gl.samples[i]));
  CHECK(worst < 1e-9);
}

TEST_CASE("knn vc: converting toward a higher tone moves the peak toward it") {
  const Waveform src(t::Tone(440.0, 1.0), 16000);
  const Waveform tgt(t::Tone(880.0, 1.0), 16000);
  const auto y = afss::ReferenceKnnVc(src, tgt, 4);
  const double peak = static_cast<double>(t::PeakBin(y.samples)) * 16000.0 / 4096;
  CHECK(std::abs(peak - 880.0) < std::abs(440.0 - 880.0) / 2);
}

TEST_CASE("knn vc: preconditions") {
  const Waveform longer(t::Tone(440.0, 0.6), 16000);
  const Waveform shorter(t::Tone(440.0, 0.3), 16000);
  CHECK_THROWS_AS(afss::ReferenceKnnVc(shorter, longer, 4), afss::InputError);
  CHECK_THROWS_AS(afss::ReferenceKnnVc(longer, longer, 1000), afss::ConfigError);
}

TEST_CASE("self_convert with the identity backend returns the base audio") {
  const auto x = Speech(1, "b");
  afss::IdentityVcBackend identity;
  RngStream rng(3, "b", "self_vc");
  const auto out = afss::SelfConvert(x, "spk01", afss::MakePreset(1), identity, rng);
  CHECK(out.audio.samples == x.samples);
  CHECK(out.speaker_id == "spk01");
  CHECK(out.source_speaker_id == "spk01");
  REQUIRE(out.transform_log.size() == 1);
  CHECK(out.transform_log[0]["stage"] == "pre_vc");
  CHECK(out.transform_log[0]["backend"] == "identity");
}

TEST_CASE("self_convert: an identity transform leaves only the conversion artifacts") {
  const auto x = Speech(3, "c");
  auto preset = afss::MakePreset(0);
  preset.pitch_shift_semitones = {0.0, 0.0};
  afss::KnnVcBackend knn;
  bool found = false;
  for (int seed = 0; seed < 64 && !found; ++seed) {
    RngStream rng(static_cast<std::uint64_t>(seed), "c", "self_vc");
    const auto out = afss::SelfConvert(x, "spk03", preset, knn, rng);
    if (out.transform_log[0]["kind"] != "PitchShift") continue;
    found = true;
    const double d_self = LogMelDistance(out.audio, x);
    const double d_other = LogMelDistance(Speech(6, "other"), x);
    CHECK(d_self > 0.0);
    CHECK(d_self < d_other);
  }
  CHECK(found);
}

TEST_CASE("self_convert draws transform kinds uniformly") {
  const Waveform x(t::WhiteNoise(1600, 0.1, 4), 16000);
  afss::IdentityVcBackend identity;
  std::map<std::string, int> counts;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    RngStream rng(11, "u" + std::to_string(i), "self_vc");
    counts[afss::SelfConvert(x, "s", afss::MakePreset(1), identity, rng).transform_log[0]["kind"]]++;
  }
  CHECK(counts.size() == 4);
  for (const auto& [kind, c] : counts) CHECK(std::abs(c / double(n) - 0.25) < 0.03);
}

TEST_CASE("self_convert skips silent input") {
  afss::IdentityVcBackend identity;
  RngStream rng(1, "s", "self_vc");
  const Waveform silent(std::vector<double>(16000, 0.0), 16000);
  CHECK_THROWS_AS(afss::SelfConvert(silent, "s", afss::MakePreset(1), identity, rng), afss::SilentInputError);
}

TEST_CASE("self_reconstruct is the vocoder round trip plus RawBoost only") {
  const auto x = Speech(4, "d");
  afss::GriffinLimVocoder gl;
  afss::RawBoostConfig none;
  none.algos.clear();
  RngStream rng(5, "d", "self_rec");
  const auto out = afss::SelfReconstruct(x, "spk04", none, gl, rng);
  CHECK(out.audio.samples == afss::GriffinLimDecode(afss::MelEncode(x)).samples);
  REQUIRE(out.transform_log.size() == 1);
  CHECK(out.transform_log[0]["kind"] == "RawBoost");
  CHECK(out.transform_log[0]["stage"] == "post_rec");
  CHECK(out.transform_log[0]["backend"] == "griffin_lim");

  RngStream rng2(5, "d", "self_rec");
  const auto boosted = afss::SelfReconstruct(x, "spk04", afss::RawBoostConfig{}, gl, rng2);
  CHECK(boosted.transform_log.size() == 1);
  CHECK(boosted.transform_log[0]["params"].contains("snr_db"));
  CHECK(std::abs(static_cast<long>(boosted.audio.size()) - static_cast<long>(x.size())) <= 256);
}

TEST_CASE("self_reconstruct: silence in, silence out") {
  afss::GriffinLimVocoder gl;
  RngStream rng(5, "z", "self_rec");
  const Waveform silent(std::vector<double>(16000, 0.0), 16000);
  const auto out = afss::SelfReconstruct(silent, "s", afss::RawBoostConfig{}, gl, rng);
  for (double v : out.audio.samples) CHECK(v == 0.0);
}

TEST_CASE("cross_convert requires a different speaker") {
  const auto x = Speech(0, "e");
  afss::IdentityVcBackend identity;
  afss::SampleRecord same{"t1", "t1.wav", afss::Label::kReal, "spk00", afss::Provenance::kReal, nlohmann::json::array()};
  CHECK_THROWS_AS(afss::CrossConvert(x, "spk00", same, x, identity), afss::InputError);
  afss::SampleRecord other = same;
  other.speaker_id = "spk05";
  const auto out = afss::CrossConvert(x, "spk00", other, Speech(5, "f"), identity);
  CHECK(out.audio.samples == x.samples);
  CHECK(out.speaker_id == "spk05");
  CHECK(out.source_speaker_id == "spk00");
}

TEST_CASE("external backends follow the subprocess protocol") {
  const auto dir = FreshDir("external");
  const auto copy_in = WriteScript(dir, "voc.sh", "cp \"$1\" \"$2\"");
  const auto copy_ref = WriteScript(dir, "vc.sh", "cp \"$2\" \"$3\"");
  const auto fail = WriteScript(dir, "fail.sh", "exit 3");
  const auto lazy = WriteScript(dir, "lazy.sh", "exit 0");

  const Waveform x(t::Tone(300.0, 0.5, 16000, 0.25), 16000);
  const Waveform ref(t::Tone(500.0, 0.5, 16000, 0.25), 16000);
  afss::ExternalVocoderBackend voc("copy", {copy_in.string()});
  const auto y = voc.Reconstruct(x);
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y.samples[i] - x.samples[i]) <= 1.0 / 32768);

  afss::ExternalVcBackend vc("copyref", {copy_ref.string()});
  const auto z = vc.Convert(x, ref);
  CHECK(std::abs(z.samples[100] - ref.samples[100]) <= 1.0 / 32768);

  CHECK_THROWS_AS(afss::ExternalVocoderBackend("fail", {fail.string()}).Reconstruct(x), afss::BackendError);
  CHECK_THROWS_AS(afss::ExternalVocoderBackend("lazy", {lazy.string()}).Reconstruct(x), afss::BackendError);
  CHECK_THROWS_AS(afss::ExternalVocoderBackend("nope", {"/nonexistent/program"}).Reconstruct(x), afss::BackendError);
}

TEST_CASE("toy corpus: deterministic, distinct speakers, audible") {
  const auto a = Speech(1, "x", 0.5);
  const auto b = Speech(1, "x", 0.5);
  CHECK(a.samples == b.samples);
  CHECK(afss::Rms(a.samples) > 0.01);
  const auto s0 = afss::MakeToySpeaker(0, 1);
  const auto s7 = afss::MakeToySpeaker(7, 1);
  CHECK(s0.f0_hz < s7.f0_hz);
  double peak = 0.0;
  for (double v : a.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 1.0);
}

TEST_CASE("generate_corpus: one same-speaker fake per real, reproducibly") {
  const auto dir = FreshDir("corpus");
  afss::ToyCorpusOptions toy;
  toy.n_speakers = 4;
  toy.n_utterances = 10;
  toy.seconds = 0.6;
  toy.seed = 3;
  const auto manifest_path = afss::MakeToyCorpus(toy, dir / "real");
  const auto reals = afss::ReadManifest(manifest_path);

  afss::CorpusOptions opts;
  opts.seed = 99;
  auto run = [&](const std::string& name, int workers) {
    opts.workers = workers;
    const auto out = dir / name;
    fs::create_directories(out / "manifests");
    auto result = afss::GenerateCorpus(reals, ReferenceBackends(), opts, out / "audio", out / "manifests");
    afss::WriteManifest(result.fakes, out / "manifests" / "fake.tsv");
    return result;
  };
  const auto first = run("run1", 1);
  const auto second = run("run2", 3);
  REQUIRE(first.failures.empty());
  REQUIRE(first.fakes.size() == reals.records.size());
  CHECK(ReadAll(dir / "run1/manifests/fake.tsv") == ReadAll(dir / "run2/manifests/fake.tsv"));
  std::map<std::string, std::string> speaker_of;
  for (const auto& r : reals.records) speaker_of[r.utterance_id] = r.speaker_id;
  std::set<afss::Provenance> seen;
  for (const auto& f : first.fakes) {
    CHECK(ReadAll(dir / "run1/audio" / (f.utterance_id + ".wav")) == ReadAll(dir / "run2/audio" / (f.utterance_id + ".wav")));
    const auto src = afss::SourceUtterance(f);
    REQUIRE(src.has_value());
    CHECK(f.speaker_id == speaker_of.at(*src));
    CHECK(f.label == afss::Label::kFake);
    seen.insert(f.provenance);
    if (f.provenance == afss::Provenance::kSelfRec) {
      REQUIRE(f.transform_log.size() == 1);
      CHECK(f.transform_log[0]["kind"] == "RawBoost");
    } else {
      CHECK(f.provenance == afss::Provenance::kSelfVc);
      CHECK(f.transform_log[0]["stage"] == "pre_vc");
    }
    CHECK(fs::exists(dir / "run1/manifests" / f.path));
  }
  CHECK(seen.size() == 2);

  opts.branch_ratio = 1.0;
  opts.workers = 1;
  const auto all_vc = afss::GenerateCorpus(reals, ReferenceBackends(), opts, dir / "vc/audio", dir / "vc");
  for (const auto& f : all_vc.fakes) CHECK(f.provenance == afss::Provenance::kSelfVc);
}

TEST_CASE("generate_corpus: cross_vc mode pairs different speakers only") {
  const auto dir = FreshDir("cross");
  afss::ToyCorpusOptions toy;
  toy.n_speakers = 3;
  toy.n_utterances = 6;
  toy.seconds = 0.6;
  const auto reals = afss::ReadManifest(afss::MakeToyCorpus(toy, dir / "real"));
  afss::CorpusOptions opts;
  opts.mode = afss::SynthesisMode::kCrossVc;
  opts.seed = 5;
  const auto result = afss::GenerateCorpus(reals, ReferenceBackends(), opts, dir / "audio", dir);
  REQUIRE(result.fakes.size() == 6);
  for (const auto& f : result.fakes) {
    CHECK(f.provenance == afss::Provenance::kCrossVc);
    CHECK(f.transform_log[0]["source_speaker"] != f.transform_log[0]["target_speaker"]);
    CHECK(f.speaker_id == f.transform_log[0]["target_speaker"]);
  }
}

TEST_CASE("generate_corpus: input validation and failure budget") {
  const auto dir = FreshDir("invalid");
  afss::ToyCorpusOptions toy;
  toy.n_speakers = 2;
  toy.n_utterances = 4;
  toy.seconds = 0.6;
  auto reals = afss::ReadManifest(afss::MakeToyCorpus(toy, dir / "real"));
  afss::CorpusOptions opts;

  auto spoofed = reals;
  spoofed.records[1].label = afss::Label::kFake;
  spoofed.records[1].provenance = afss::Provenance::kSelfVc;
  CHECK_THROWS_AS(afss::GenerateCorpus(spoofed, ReferenceBackends(), opts, dir / "a", dir), afss::ValidationError);
  CHECK_THROWS_AS(afss::GenerateCorpus(afss::Manifest{}, ReferenceBackends(), opts, dir / "a", dir),
                  afss::ValidationError);

  auto broken = reals;
  broken.records[2].path = "audio/missing.wav";
  try {
    afss::GenerateCorpus(broken, ReferenceBackends(), opts, dir / "b", dir);
    FAIL("expected abort");
  } catch (const afss::Error& e) {
    CHECK(std::string(e.what()).find(broken.records[2].utterance_id) != std::string::npos);
  }

  opts.max_failure_ratio = 0.5;
  const auto tolerated = afss::GenerateCorpus(broken, ReferenceBackends(), opts, dir / "c", dir);
  CHECK(tolerated.fakes.size() + tolerated.failures.size() == broken.records.size());
  CHECK(tolerated.failures.size() == 1);

  opts.mode = afss::SynthesisMode::kCrossVc;
  auto mono = reals;
  for (auto& r : mono.records) r.speaker_id = "only";
  CHECK_THROWS_AS(afss::GenerateCorpus(mono, ReferenceBackends(), opts, dir / "d", dir), afss::ConfigError);
}
