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

#include <filesystem>
#include <fstream>

#include "afss/audio.hpp"
#include "afss/error.hpp"
#include "afss/manifest.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
namespace t = afss::testing;

namespace {

fs::path FreshDir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "afss_test_manifest" / name;
  fs::remove_all(dir);
  fs::create_directories(dir / "audio");
  return dir;
}

void WriteTone(const fs::path& p, int rate = 16000) {
  afss::SaveWav(afss::Waveform(t::Tone(440.0, 0.2, rate), rate), p);
}

fs::path WriteText(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

const std::string kHeader = std::string(afss::kManifestHeader) + "\n";

}  // namespace

TEST_CASE("manifest: write then read round-trips records") {
  const auto dir = FreshDir("roundtrip");
  afss::SampleRecord real{"a", "audio/a.wav", afss::Label::kReal, "spk1", afss::Provenance::kReal,
                          nlohmann::json::array()};
  afss::SampleRecord fake{"a-self_vc", "audio/a-self_vc.wav", afss::Label::kFake, "spk1", afss::Provenance::kSelfVc,
                          nlohmann::json::array({{{"stage", "pre_vc"}, {"kind", "PitchShift"}}})};
  afss::WriteManifest({real, fake}, dir / "m.tsv");
  const auto m = afss::ReadManifest(dir / "m.tsv");
  REQUIRE(m.records.size() == 2);
  CHECK(m.records[0] == real);
  CHECK(m.records[1] == fake);
  CHECK(m.line_numbers == std::vector<int>{2, 3});
  CHECK(m.Resolve(m.records[0]) == dir / "audio/a.wav");
  CHECK(m.Count(afss::Label::kFake) == 1);
  CHECK(afss::SourceUtterance(m.records[1]) == "a");
  CHECK_FALSE(afss::SourceUtterance(m.records[0]).has_value());
  CHECK_FALSE(fs::exists(dir / "m.tsv.tmp"));
}

TEST_CASE("manifest: malformed lines are reported with line numbers") {
  const auto dir = FreshDir("malformed");
  const auto p = WriteText(dir / "m.tsv", kHeader +
                                              "a\taudio/a.wav\tbonafide\tspk\treal\t[]\n"
                                              "b\taudio/b.wav\tgenuine\tspk\treal\t[]\n"
                                              "c\taudio/c.wav\tspoof\tspk\treal\t[]\n"
                                              "d\taudio/d.wav\tbonafide\tspk\n"
                                              "e\taudio/e.wav\tbonafide\tspk\treal\t{not json\n");
  try {
    afss::ReadManifest(p);
    FAIL("expected FormatError");
  } catch (const afss::FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":3: unknown label 'genuine'") != std::string::npos);
    CHECK(msg.find(":4: label spoof contradicts provenance real") != std::string::npos);
    CHECK(msg.find(":5: expected 6 tab-separated columns, found 4") != std::string::npos);
    CHECK(msg.find(":6: transform_log is not valid JSON") != std::string::npos);
    CHECK(msg.find(":2:") == std::string::npos);
  }
}

TEST_CASE("validate: clean manifest gives an empty report") {
  const auto dir = FreshDir("clean");
  WriteTone(dir / "audio/a.wav");
  WriteTone(dir / "audio/b.wav");
  const auto p = WriteText(dir / "m.tsv", kHeader +
                                              "a\taudio/a.wav\tbonafide\tspk\treal\t[]\n"
                                              "b\taudio/b.wav\tspoof\tspk\tself_rec\t[]\n");
  CHECK(afss::ValidateManifest(p).empty());
}

TEST_CASE("validate: duplicates, missing files and wrong rates are listed") {
  const auto dir = FreshDir("issues");
  WriteTone(dir / "audio/a.wav");
  WriteTone(dir / "audio/r.wav", 22050);
  const auto p = WriteText(dir / "m.tsv", kHeader +
                                              "a\taudio/a.wav\tbonafide\tspk\treal\t[]\n"
                                              "gone\taudio/gone.wav\tbonafide\tspk\treal\t[]\n"
                                              "a\taudio/a.wav\tbonafide\tspk\treal\t[]\n"
                                              "r\taudio/r.wav\tbonafide\tspk\treal\t[]\n"
                                              "x\taudio/a.wav\tmaybe\tspk\treal\t[]\n");
  const auto issues = afss::ValidateManifest(p);
  REQUIRE(issues.size() == 4);
  CHECK(issues[0].line == 3);
  CHECK(issues[0].message.find("missing audio file") != std::string::npos);
  CHECK(issues[1].line == 4);
  CHECK(issues[1].message.find("duplicate utterance_id 'a' (first on line 2)") != std::string::npos);
  CHECK(issues[2].line == 5);
  CHECK(issues[2].message.find("22050") != std::string::npos);
  CHECK(issues[3].line == 6);
  const std::string text = afss::FormatIssues(p, issues);
  CHECK(text.find(p.string() + ":4:") != std::string::npos);
}

TEST_CASE("pipeline audio is resampled to 16 kHz") {
  const auto dir = FreshDir("resample");
  WriteTone(dir / "audio/r.wav", 8000);
  afss::Manifest m;
  m.base_dir = dir;
  m.records.push_back({"r", "audio/r.wav", afss::Label::kReal, "s", afss::Provenance::kReal, nlohmann::json::array()});
  const auto w = afss::LoadPipelineAudio(m, m.records[0]);
  CHECK(w.sample_rate == 16000);
  CHECK(std::abs(static_cast<long>(w.size()) - 3200) <= 1);
}
