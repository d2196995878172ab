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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afss/config.hpp"
#include "afss/manifest.hpp"
#include "afss/metrics.hpp"
#include "afss/synthesis.hpp"
#include "afss/training.hpp"

namespace afss {

// Run directory layout:
//   config.snapshot  resolved config, compared on every reopen
//   manifests/       fake.tsv and train.tsv from synthesize
//   audio/           synthesized wavs
//   checkpoints/     last.ckpt, best.ckpt
//   scores/          <dataset>.scores and summary.json
//   history.jsonl    one JSON line per training epoch
// An exclusive advisory lock on .lock is held while the object lives.
class RunDir {
 public:
  // Creates the layout if needed. Throws ConfigError when an existing snapshot
  // differs from `cfg` (unless force), and Error when another process holds the lock.
  static RunDir Open(const std::filesystem::path& root, const ExperimentConfig& cfg, bool force = false);

  RunDir(RunDir&& other) noexcept;
  RunDir& operator=(RunDir&&) = delete;
  RunDir(const RunDir&) = delete;
  ~RunDir();

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path snapshot() const { return root_ / "config.snapshot"; }
  std::filesystem::path manifests() const { return root_ / "manifests"; }
  std::filesystem::path audio() const { return root_ / "audio"; }
  std::filesystem::path checkpoints() const { return root_ / "checkpoints"; }
  std::filesystem::path scores() const { return root_ / "scores"; }
  std::filesystem::path history() const { return root_ / "history.jsonl"; }

 private:
  RunDir(std::filesystem::path root, int fd) : root_(std::move(root)), lock_fd_(fd) {}
  std::filesystem::path root_;
  int lock_fd_ = -1;
};

struct SynthesizeReport {
  std::filesystem::path fake_manifest;
  std::filesystem::path merged_manifest;
  std::map<std::string, std::size_t> counts;  // per provenance, merged manifest
  std::vector<CorpusFailure> failures;
};

// Pseudo-fakes for every real in `real_manifest`, written to manifests/fake.tsv,
// plus manifests/train.tsv holding reals followed by fakes.
SynthesizeReport CmdSynthesize(const ExperimentConfig& cfg, const std::filesystem::path& real_manifest, RunDir& run);

struct TrainCommandOptions {
  std::optional<int> stop_after_epoch;
  bool fresh = false;  // ignore an existing last.ckpt
};

// Trains from scratch or resumes from checkpoints/last.ckpt.
TrainResult CmdTrain(const ExperimentConfig& cfg, const std::filesystem::path& train_manifest,
                     const std::filesystem::path& dev_manifest, RunDir& run, const TrainCommandOptions& opts = {});

struct DatasetSummary {
  std::string name;
  std::filesystem::path manifest;
  std::filesystem::path score_file;
  MetricSummary metrics;
};

struct EvaluateReport {
  std::vector<DatasetSummary> datasets;
  MetricSummary average;
  std::filesystem::path summary_file;

  nlohmann::json ToJson() const;
};

// Scores each manifest with `checkpoint`, writing scores/<name>.scores and
// scores/summary.json (one row per dataset plus their unweighted average).
EvaluateReport CmdEvaluate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                           const std::vector<std::filesystem::path>& manifests, RunDir& run);

// Metrics of an existing score file against the labels in `manifest`.
// Throws ValidationError on ids missing from either side.
MetricSummary CmdScore(const std::filesystem::path& score_file, const std::filesystem::path& manifest);

std::vector<ManifestIssue> CmdValidate(const std::filesystem::path& manifest);

}  // namespace afss
