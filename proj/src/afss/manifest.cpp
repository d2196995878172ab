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

#include "afss/manifest.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "afss/error.hpp"

namespace afss {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool IsFakeProvenance(Provenance p) { return p != Provenance::kReal; }

// Parses one data line; returns an error message or the record.
std::optional<std::string> ParseLine(const std::string& line, SampleRecord& rec) {
  const auto cols = SplitTabs(line);
  if (cols.size() != 6) return "expected 6 tab-separated columns, found " + std::to_string(cols.size());
  rec.utterance_id = cols[0];
  rec.path = cols[1];
  rec.speaker_id = cols[3];
  if (rec.utterance_id.empty()) return std::string("empty utterance_id");
  if (rec.path.empty()) return std::string("empty path");
  if (rec.speaker_id.empty()) return std::string("empty speaker_id");
  const auto label = ParseLabel(cols[2]);
  if (!label) return "unknown label '" + cols[2] + "' (expected bonafide|spoof)";
  rec.label = *label;
  const auto prov = ParseProvenance(cols[4]);
  if (!prov) return "unknown provenance '" + cols[4] + "'";
  rec.provenance = *prov;
  if ((rec.label == Label::kFake) != IsFakeProvenance(rec.provenance))
    return "label " + cols[2] + " contradicts provenance " + cols[4];
  try {
    rec.transform_log = nlohmann::json::parse(cols[5]);
  } catch (const nlohmann::json::exception&) {
    return std::string("transform_log is not valid JSON");
  }
  if (!rec.transform_log.is_array()) return std::string("transform_log must be a JSON array");
  return std::nullopt;
}

}  // namespace

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kReal: return "real";
    case Provenance::kSelfVc: return "self_vc";
    case Provenance::kSelfRec: return "self_rec";
    case Provenance::kCrossVc: return "cross_vc";
  }
  return "?";
}

std::optional<Provenance> ParseProvenance(std::string_view s) {
  for (auto p : {Provenance::kReal, Provenance::kSelfVc, Provenance::kSelfRec, Provenance::kCrossVc})
    if (ProvenanceName(p) == s) return p;
  return std::nullopt;
}

std::optional<Label> ParseLabel(std::string_view s) {
  if (s == "bonafide") return Label::kReal;
  if (s == "spoof") return Label::kFake;
  return std::nullopt;
}

std::string FakeUtteranceId(std::string_view source_id, Provenance p) {
  return std::string(source_id) + "-" + std::string(ProvenanceName(p));
}

std::optional<std::string> SourceUtterance(const SampleRecord& r) {
  if (r.provenance == Provenance::kReal) return std::nullopt;
  const std::string suffix = "-" + std::string(ProvenanceName(r.provenance));
  const auto& id = r.utterance_id;
  if (id.size() <= suffix.size() || id.compare(id.size() - suffix.size(), suffix.size(), suffix) != 0)
    return std::nullopt;
  return id.substr(0, id.size() - suffix.size());
}

fs::path Manifest::Resolve(const SampleRecord& r) const {
  const fs::path p(r.path);
  return p.is_absolute() ? p : base_dir / p;
}

std::size_t Manifest::Count(Label l) const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.label == l;
  return n;
}

std::string Manifest::Where(std::size_t i) const {
  return i < line_numbers.size() ? "line " + std::to_string(line_numbers[i]) + ": " : "";
}

Manifest ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  Manifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::vector<ManifestIssue> issues;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    SampleRecord rec;
    if (auto err = ParseLine(line, rec)) {
      issues.push_back({lineno, *err});
      continue;
    }
    m.records.push_back(std::move(rec));
    m.line_numbers.push_back(lineno);
  }
  if (!issues.empty()) throw FormatError(FormatIssues(path, issues));
  return m;
}

std::string FormatManifest(const std::vector<SampleRecord>& records) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.utterance_id;
    out += '\t';
    out += r.path;
    out += '\t';
    out += LabelName(r.label);
    out += '\t';
    out += r.speaker_id;
    out += '\t';
    out += ProvenanceName(r.provenance);
    out += '\t';
    out += r.transform_log.dump();
    out += '\n';
  }
  return out;
}

void AtomicWrite(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void WriteManifest(const std::vector<SampleRecord>& records, const fs::path& path) {
  AtomicWrite(path, FormatManifest(records));
}

std::vector<ManifestIssue> ValidateManifest(const fs::path& path, int expected_rate) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::vector<ManifestIssue> issues;
  std::map<std::string, int> first_seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    SampleRecord rec;
    if (auto err = ParseLine(line, rec)) {
      issues.push_back({lineno, *err});
      if (SplitTabs(line).size() != 6) continue;
    }
    if (!rec.utterance_id.empty()) {
      auto [it, inserted] = first_seen.emplace(rec.utterance_id, lineno);
      if (!inserted)
        issues.push_back({lineno, "duplicate utterance_id '" + rec.utterance_id + "' (first on line " +
                                      std::to_string(it->second) + ")"});
    }
    if (rec.path.empty()) continue;
    const fs::path audio = fs::path(rec.path).is_absolute() ? fs::path(rec.path) : base / rec.path;
    if (!fs::exists(audio)) {
      issues.push_back({lineno, "missing audio file '" + audio.string() + "'"});
      continue;
    }
    try {
      const auto w = LoadWav(audio);
      if (w.sample_rate != expected_rate)
        issues.push_back({lineno, "sample rate " + std::to_string(w.sample_rate) + " Hz, expected " +
                                      std::to_string(expected_rate)});
    } catch (const Error& e) {
      issues.push_back({lineno, e.what()});
    }
  }
  return issues;
}

std::string FormatIssues(const fs::path& path, const std::vector<ManifestIssue>& issues) {
  std::ostringstream out;
  for (const auto& i : issues) out << path.string() << ":" << i.line << ": " << i.message << "\n";
  return out.str();
}

Waveform LoadPipelineAudio(const Manifest& m, const SampleRecord& r) {
  return Resample(LoadWav(m.Resolve(r)), kPipelineRate);
}

}  // namespace afss
