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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "afss/audio.hpp"
#include "afss/label.hpp"

namespace afss {

enum class Provenance { kReal, kSelfVc, kSelfRec, kCrossVc };

std::string_view ProvenanceName(Provenance p);
std::optional<Provenance> ParseProvenance(std::string_view s);
std::optional<Label> ParseLabel(std::string_view s);

// One manifest line. `path` is kept exactly as written (relative to the
// manifest's directory unless absolute).
struct SampleRecord {
  std::string utterance_id;
  std::string path;
  Label label = Label::kReal;
  std::string speaker_id;
  Provenance provenance = Provenance::kReal;
  nlohmann::json transform_log = nlohmann::json::array();

  bool operator==(const SampleRecord&) const = default;
};

// Pseudo-fakes are named `<source id>-<provenance>`; returns the source id,
// or nullopt for real records and foreign ids.
std::optional<std::string> SourceUtterance(const SampleRecord& r);
std::string FakeUtteranceId(std::string_view source_id, Provenance p);

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<SampleRecord> records;
  // Source line of each record when read from a file; empty otherwise.
  std::vector<int> line_numbers;

  std::filesystem::path Resolve(const SampleRecord& r) const;
  std::size_t Count(Label l) const;
  // "line N: " prefix for record i, or "" when line numbers are unknown.
  std::string Where(std::size_t i) const;
};

inline constexpr std::string_view kManifestHeader =
    "# utterance_id\tpath\tlabel\tspeaker_id\tprovenance\ttransform_log";

// Throws IoError / FormatError; format errors name every bad line.
Manifest ReadManifest(const std::filesystem::path& path);
std::string FormatManifest(const std::vector<SampleRecord>& records);
// Writes through a temporary file and renames into place.
void WriteManifest(const std::vector<SampleRecord>& records, const std::filesystem::path& path);

struct ManifestIssue {
  int line = 0;
  std::string message;
};

// Checks arity, label and provenance vocabulary, label/provenance agreement,
// transform-log JSON, audio existence, sample rate and duplicate ids.
std::vector<ManifestIssue> ValidateManifest(const std::filesystem::path& path, int expected_rate = kPipelineRate);
std::string FormatIssues(const std::filesystem::path& path, const std::vector<ManifestIssue>& issues);

// Loads a manifest entry's audio and brings it to the pipeline rate.
Waveform LoadPipelineAudio(const Manifest& m, const SampleRecord& r);

// Writes bytes to `path` atomically (temp file in the same directory + rename).
void AtomicWrite(const std::filesystem::path& path, std::string_view bytes);

}  // namespace afss
