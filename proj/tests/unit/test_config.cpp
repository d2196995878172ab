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

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "afss/config.hpp"
#include "afss/error.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

TEST_CASE("config: empty text yields the defaults") {
  const auto c = afss::ParseConfig("");
  CHECK(c == afss::ExperimentConfig{});
  CHECK(c.training.lr_front == 5e-6);
  CHECK(c.training.lr_head == 1e-4);
  CHECK(c.training.lr_loss == 1e-6);
  CHECK(c.training.batch_size == 12);
  CHECK(c.training.patience == 10);
  CHECK(c.ActivePreset().pitch_shift_semitones == afss::Interval{-0.5, 0.5});
  CHECK(c.rawboost.n_bands == 5);
}

TEST_CASE("config: parse(serialize(c)) == c") {
  afss::ExperimentConfig c;
  c.seed = 1234567890123ULL;
  c.level = 2;
  c.presets[3].time_stretch_rate = {0.7000000000000001, 1.3};
  c.rawboost.algos = {afss::RawBoostAlgo::kImpulsive};
  c.rawboost.snr_db = {12.25, 33.0};
  c.synthesis.mode = afss::SynthesisMode::kCrossVc;
  c.synthesis.branch_ratio = 0.1;
  c.synthesis.vocoders = {"griffin_lim", "ext"};
  c.external_vocoders["ext"] = {"/usr/bin/my vocoder", "--fast"};
  c.external_vc["other"] = {"convert.sh"};
  c.training.lr_head = 3e-4;
  c.training.freeze_front_end = true;
  c.training.seed = c.seed;
  c.paths.eval_manifests = {"a.tsv", "b.tsv"};
  c.paths.run_dir = "runs/x";
  const std::string text = afss::SerializeConfig(c);
  const auto back = afss::ParseConfig(text);
  CHECK(back == c);
  CHECK(afss::SerializeConfig(back) == text);
  CHECK(afss::ParseConfig(afss::SerializeConfig({})) == afss::ExperimentConfig{});
}

TEST_CASE("config: unknown keys, sections and bad values are rejected") {
  CHECK_THROWS_AS(afss::ParseConfig("[training]\nlearning_rate = 1\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[optimizer]\nlr = 1\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("colour = blue\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[training]\nmax_epochs = ten\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[training]\nbatch_size = 7\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[training]\nwarmup_epochs = 30\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[training]\nlr_head = nan\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[transforms]\nlevel1_pitch_shift = [1, -1]\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[transforms]\nlevel = 4\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[synthesis]\nvocoders = hifigan\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[synthesis]\nmode = mixed\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[detector]\nfront_end = xlsr\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[training]\nlr_head = 1\nlr_head = 2\n"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ParseConfig("[backends]\nmystery = x\n"), afss::ConfigError);
  try {
    afss::ParseConfig("[training]\nlearning_rate = 1\n", "exp.ini");
  } catch (const afss::ConfigError& e) {
    CHECK(std::string(e.what()) == "exp.ini: [training] learning_rate: unknown key");
  }
}

TEST_CASE("config: external backends join the registry") {
  const auto c = afss::ParseConfig(
      "[synthesis]\nvc = mine\nvocoders = griffin_lim, voc\n"
      "[backends]\nvc.mine = python3 convert.py --k 4\nvocoder.voc = \"/opt/my tools/voc\"\n");
  CHECK(c.external_vc.at("mine") == std::vector<std::string>{"python3", "convert.py", "--k", "4"});
  CHECK(c.external_vocoders.at("voc") == std::vector<std::string>{"/opt/my tools/voc"});
  const auto b = afss::MakeBackends(c);
  CHECK(b.vc->name() == "mine");
  REQUIRE(b.vocoders.size() == 2);
  CHECK(b.vocoders[1]->name() == "voc");
  CHECK(afss::MakeBackends(afss::ExperimentConfig{}).vc->name() == "knn");
}

TEST_CASE("config: overrides apply atomically") {
  afss::ExperimentConfig c;
  afss::ApplyOverrides(c, {"training.max_epochs=3", "training.warmup_epochs=1", "seed=9"});
  CHECK(c.training.max_epochs == 3);
  CHECK(c.training.warmup_epochs == 1);
  CHECK(c.seed == 9);
  CHECK(c.training.seed == 9);
  const auto before = c;
  CHECK_THROWS_AS(afss::ApplyOverrides(c, {"training.lr_head=0.1", "training.nope=1"}), afss::ConfigError);
  CHECK(c == before);
  CHECK_THROWS_AS(afss::ApplyOverride(c, "training.warmup_epochs=5"), afss::ConfigError);
  CHECK_THROWS_AS(afss::ApplyOverride(c, "no_equals_sign"), afss::ConfigError);
  CHECK(afss::ConfigValue(c, "training.max_epochs") == "3");
  CHECK(afss::ConfigValue(c, "seed") == "9");
  CHECK_THROWS_AS(afss::ConfigValue(c, "training.bogus"), afss::ConfigError);
}

TEST_CASE("config: the environment supplies the default path") {
  const auto dir = fs::temp_directory_path() / "afss_test_config";
  fs::create_directories(dir);
  std::ofstream(dir / "env.ini") << "seed = 77\n";
  ::setenv(afss::kConfigEnvVar, (dir / "env.ini").c_str(), 1);
  CHECK(afss::ResolveConfigPath(std::nullopt) == dir / "env.ini");
  CHECK(afss::ResolveConfigPath(fs::path("given.ini")) == fs::path("given.ini"));
  CHECK(afss::LoadConfig(*afss::ResolveConfigPath(std::nullopt)).seed == 77);
  ::unsetenv(afss::kConfigEnvVar);
  CHECK_FALSE(afss::ResolveConfigPath(std::nullopt).has_value());
  CHECK_THROWS_AS(afss::LoadConfig(dir / "missing.ini"), afss::IoError);
}

TEST_CASE("command splitting honours quotes") {
  CHECK(afss::SplitCommand("a  b\t\"c d\" \"\"") == std::vector<std::string>{"a", "b", "c d", ""});
  CHECK_THROWS_AS(afss::SplitCommand("a \"b"), afss::ConfigError);
}
