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

#include "afss/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "afss/error.hpp"

namespace afss {

namespace fs = std::filesystem;

namespace {

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string RelativeTo(const fs::path& target, const fs::path& base) {
  return fs::absolute(target).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal()).generic_string();
}

}  // namespace

RunDir RunDir::Open(const fs::path& root, const ExperimentConfig& cfg, bool force) {
  if (root.empty()) throw ConfigError("no run directory given (use --run-dir or [paths] run_dir)");
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create run directory " + root.string() + ": " + ec.message());
  const fs::path lock_path = root / ".lock";
  const int fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open " + lock_path.string() + ": " + std::strerror(errno));
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    throw Error("run directory " + root.string() + " is locked by another process");
  }
  RunDir run(root, fd);
  for (const auto& d : {run.manifests(), run.audio(), run.checkpoints(), run.scores()}) fs::create_directories(d);
  const std::string snapshot = SerializeConfig(cfg);
  if (fs::exists(run.snapshot())) {
    const std::string existing = ReadText(run.snapshot());
    if (existing != snapshot && !force)
      throw ConfigError("run directory " + root.string() +
                        " holds a different config snapshot; use --force to overwrite it");
  }
  AtomicWrite(run.snapshot(), snapshot);
  return run;
}

RunDir::RunDir(RunDir&& other) noexcept : root_(std::move(other.root_)), lock_fd_(other.lock_fd_) {
  other.lock_fd_ = -1;
}

RunDir::~RunDir() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

SynthesizeReport CmdSynthesize(const ExperimentConfig& cfg, const fs::path& real_manifest, RunDir& run) {
  const Manifest reals = ReadManifest(real_manifest);
  CorpusOptions opts;
  opts.mode = cfg.synthesis.mode;
  opts.branch_ratio = cfg.synthesis.branch_ratio;
  opts.preset = cfg.ActivePreset();
  opts.seed = cfg.seed;
  opts.workers = cfg.synthesis.workers;
  opts.max_failure_ratio = cfg.synthesis.max_failure_ratio;
  CorpusResult corpus = GenerateCorpus(reals, MakeBackends(cfg), opts, run.audio(), run.manifests());

  SynthesizeReport report;
  report.fake_manifest = run.manifests() / "fake.tsv";
  report.merged_manifest = run.manifests() / "train.tsv";
  WriteManifest(corpus.fakes, report.fake_manifest);

  std::vector<SampleRecord> merged;
  std::set<std::string> sources;
  for (const auto& f : corpus.fakes)
    if (auto src = SourceUtterance(f)) sources.insert(*src);
  for (const auto& r : reals.records) {
    // Reals whose synthesis failed are left out so the classes stay paired.
    if (!sources.count(r.utterance_id)) continue;
    SampleRecord copy = r;
    copy.path = RelativeTo(reals.Resolve(r), run.manifests());
    merged.push_back(std::move(copy));
  }
  merged.insert(merged.end(), corpus.fakes.begin(), corpus.fakes.end());
  WriteManifest(merged, report.merged_manifest);
  for (const auto& r : merged) report.counts[std::string(ProvenanceName(r.provenance))]++;
  report.failures = std::move(corpus.failures);
  return report;
}

TrainResult CmdTrain(const ExperimentConfig& cfg, const fs::path& train_manifest, const fs::path& dev_manifest,
                     RunDir& run, const TrainCommandOptions& opts) {
  const Manifest train = ReadManifest(train_manifest);
  const Manifest dev = ReadManifest(dev_manifest);
  HeadOptions head;
  head.dropout = cfg.detector.dropout;
  DetectorModel model(MakeConfiguredFrontEnd(cfg), head);
  model.Initialize(cfg.seed);
  TrainOptions t;
  t.cfg = cfg.training;
  t.run_dir = run.root();
  t.config_snapshot = SerializeConfig(cfg);
  t.resume = !opts.fresh;
  t.stop_after_epoch = opts.stop_after_epoch;
  t.workers = cfg.train_workers;
  if (opts.fresh) {
    fs::remove(run.checkpoints() / "last.ckpt");
    fs::remove(run.checkpoints() / "best.ckpt");
  }
  return Train(model, train, dev, t);
}

nlohmann::json EvaluateReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& d : datasets) {
    nlohmann::json row = d.metrics.ToJson();
    row["name"] = d.name;
    row["manifest"] = d.manifest.generic_string();
    rows.push_back(row);
  }
  return {{"datasets", rows}, {"average", average.ToJson()}};
}

EvaluateReport CmdEvaluate(const ExperimentConfig& cfg, const fs::path& checkpoint,
                           const std::vector<fs::path>& manifests, RunDir& run) {
  if (manifests.empty()) throw ConfigError("evaluate needs at least one manifest");
  const DetectorModel model = LoadModel(checkpoint, cfg.detector.front_end);
  EvaluateReport report;
  std::set<std::string> names;
  std::vector<MetricSummary> rows;
  for (const auto& path : manifests) {
    std::string name = path.stem().string();
    for (int k = 2; names.count(name); ++k) name = path.stem().string() + "_" + std::to_string(k);
    names.insert(name);
    const Manifest m = ReadManifest(path);
    if (m.Count(Label::kReal) == 0 || m.Count(Label::kFake) == 0)
      throw ValidationError(path.string() + ": evaluation needs both bonafide and spoof records");
    const ScoreSet scores = ScoreManifest(model, m, cfg.train_workers);
    DatasetSummary d{name, path, run.scores() / (name + ".scores"), Summarize(scores)};
    WriteScoreFile(scores, d.score_file);
    rows.push_back(d.metrics);
    report.datasets.push_back(std::move(d));
  }
  report.average = AverageSummaries(rows);
  report.summary_file = run.scores() / "summary.json";
  AtomicWrite(report.summary_file, report.ToJson().dump(2) + "\n");
  return report;
}

MetricSummary CmdScore(const fs::path& score_file, const fs::path& manifest) {
  const Manifest m = ReadManifest(manifest);
  const auto scores = ReadScoreFile(score_file);
  std::unordered_map<std::string, Label> labels;
  for (const auto& r : m.records) labels[r.utterance_id] = r.label;
  ScoreSet set;
  std::set<std::string> seen;
  std::string problems;
  for (const auto& [id, score] : scores) {
    const auto it = labels.find(id);
    if (it == labels.end()) {
      problems += "  " + id + ": not in manifest\n";
      continue;
    }
    if (!seen.insert(id).second) {
      problems += "  " + id + ": scored twice\n";
      continue;
    }
    set.Add(id, it->second, score);
  }
  for (std::size_t i = 0; i < m.records.size(); ++i)
    if (!seen.count(m.records[i].utterance_id)) problems += "  " + m.Where(i) + m.records[i].utterance_id + ": no score\n";
  if (!problems.empty())
    throw ValidationError(score_file.string() + " does not match " + manifest.string() + ":\n" + problems);
  return Summarize(set);
}

std::vector<ManifestIssue> CmdValidate(const fs::path& manifest) { return ValidateManifest(manifest); }

}  // namespace afss
