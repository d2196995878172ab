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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "afss/label.hpp"

namespace afss {

struct ScoreEntry {
  std::string utterance_id;
  Label label = Label::kReal;
  double score = 0.0;
};

struct ScoreSet {
  std::vector<ScoreEntry> entries;

  std::size_t n_real() const;
  std::size_t n_fake() const;
  void Add(std::string id, Label label, double score) { entries.push_back({std::move(id), label, score}); }
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// FAR(t) = share of real scores >= t, FRR(t) = share of fake scores < t. The
// sweep walks the distinct scores in ascending order and linearly
// interpolates the ROC segment on which FAR and FRR cross. Throws InputError
// unless both classes are present.
EerResult ComputeEer(const ScoreSet& s);

// Mann-Whitney estimate P(fake > real) + P(tie) / 2 from rank sums.
double ComputeAuc(const ScoreSet& s);

// Share of entries where (score >= threshold) == (label is fake).
double ComputeAccuracy(const ScoreSet& s, double threshold = 0.5);

// Fake is the positive class; equal scores enter the ranking as one group.
double ComputeAveragePrecision(const ScoreSet& s);

struct MetricSummary {
  double eer = 0.0;
  double auc = 0.0;
  double acc = 0.0;
  double ap = 0.0;
  std::size_t n_real = 0;
  std::size_t n_fake = 0;
  double threshold = 0.0;  // EER operating point

  nlohmann::json ToJson() const;
};

MetricSummary Summarize(const ScoreSet& s, double acc_threshold = 0.5);

// Unweighted mean of eer/auc/acc/ap across datasets; counts are summed.
MetricSummary AverageSummaries(const std::vector<MetricSummary>& rows);

// `utterance_id score` per line, LF endings.
void WriteScoreFile(const ScoreSet& s, const std::filesystem::path& path);
// Returns (id, score) pairs in file order; labels must be joined separately.
std::vector<std::pair<std::string, double>> ReadScoreFile(const std::filesystem::path& path);

std::string FormatScore(double v);

}  // namespace afss
