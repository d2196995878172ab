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

// Runs the afss executable and checks exit codes: 0 ok, 1 validation, 2 runtime.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path& Scratch() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "afss_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int Run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + AFSS_CLI + " " + args + " >" + (Scratch() / "out.txt").string() + " 2>" +
                          (Scratch() / "err.txt").string();
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string Err() { return Slurp(Scratch() / "err.txt"); }

const fs::path& Corpus() {
  static const fs::path manifest = [] {
    REQUIRE(Run("toy-corpus " + (Scratch() / "corpus").string() + " --speakers 2 --utterances 6 --seconds 0.6") == 0);
    return Scratch() / "corpus" / "real.tsv";
  }();
  return manifest;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(Run("") == 1);
  CHECK(Run("frobnicate") == 1);
  CHECK(Run("--help") == 0);
}

TEST_CASE("validate: clean manifest exits 0, broken manifest exits 1") {
  CHECK(Run("validate " + Corpus().string()) == 0);
  std::ofstream(Scratch() / "broken.tsv") << "a\tnowhere.wav\tbonafide\tspk\treal\t[]\n"
                                          << "a\tnowhere.wav\tbonafide\tspk\treal\t[]\n";
  CHECK(Run("validate " + (Scratch() / "broken.tsv").string()) == 1);
  CHECK(Err().find("line 1: missing audio file") != std::string::npos);
  CHECK(Err().find("line 2: duplicate utterance_id 'a' (first on line 1)") != std::string::npos);
  CHECK(Run("validate " + (Scratch() / "absent.tsv").string()) == 2);
}

TEST_CASE("config problems exit 1, missing config file exits 2") {
  const std::string run = " --run-dir " + (Scratch() / "run_cfg").string();
  CHECK(Run(run + " --set training.bogus=1 synthesize --real " + Corpus().string()) == 1);
  std::ofstream(Scratch() / "bad.ini") << "[training]\nbatch_size = 5\n";
  CHECK(Run(run + " synthesize --real " + Corpus().string(), "AFSS_CONFIG=" + (Scratch() / "bad.ini").string()) == 1);
  CHECK(Err().find("batch_size") != std::string::npos);
  CHECK(Run(run + " --config /nonexistent/x.ini synthesize --real " + Corpus().string()) == 2);
}

TEST_CASE("synthesize: spoof input exits 1; failing backend exits 2") {
  std::ofstream(Scratch() / "spoof.tsv") << "x-self_vc\t" << (Scratch() / "corpus/audio").string()
                                         << "/spk00_u0000.wav\tspoof\tspk00\tself_vc\t[]\n";
  CHECK(Run("--run-dir " + (Scratch() / "run_spoof").string() + " synthesize --real " +
            (Scratch() / "spoof.tsv").string()) == 1);
  std::ofstream(Scratch() / "fail.sh") << "#!/bin/sh\nexit 3\n";
  fs::permissions(Scratch() / "fail.sh", fs::perms::owner_all);
  std::ofstream(Scratch() / "fail.ini") << "[synthesis]\nbranch_ratio = 0\nvocoders = broken\n"
                                        << "[backends]\nvocoder.broken = " << (Scratch() / "fail.sh").string() << "\n";
  CHECK(Run("--config " + (Scratch() / "fail.ini").string() + " --run-dir " + (Scratch() / "run_fail").string() +
            " synthesize --real " + Corpus().string()) == 2);
  CHECK(Err().find("failed") != std::string::npos);
}

TEST_CASE("full cycle through the CLI, with seed taken after the subcommand") {
  std::ofstream(Scratch() / "small.ini") << "[training]\nmax_epochs = 2\nwarmup_epochs = 1\nbatch_size = 2\n"
                                         << "[detector]\ntoy_hidden = 4\n";
  const std::string env = "AFSS_CONFIG=" + (Scratch() / "small.ini").string();
  const fs::path run = Scratch() / "run_ok";
  const std::string base = "--run-dir " + run.string() + " ";
  REQUIRE(Run(base + "synthesize --seed 4 --real " + Corpus().string(), env) == 0);
  CHECK(Slurp(Scratch() / "out.txt").find("real\t6") != std::string::npos);
  const std::string train = (run / "manifests/train.tsv").string();
  REQUIRE(Run(base + "train --seed 4 --dev " + train, env) == 0);
  CHECK(fs::exists(run / "checkpoints/best.ckpt"));
  CHECK(Run(base + "train --seed 5 --dev " + train, env) == 1);
  CHECK(Err().find("--force") != std::string::npos);
  REQUIRE(Run(base + "evaluate --seed 4 " + train, env) == 0);
  CHECK(Run("score " + (run / "scores/train.scores").string() + " " + train) == 0);
  CHECK(Slurp(Scratch() / "out.txt").find("\"eer\"") != std::string::npos);
  CHECK(Run("score " + (run / "scores/train.scores").string() + " " + Corpus().string()) == 1);
}
