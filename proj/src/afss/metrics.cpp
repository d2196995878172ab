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

#include "afss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "afss/error.hpp"

namespace afss {

namespace {

void RequireBothClasses(const ScoreSet& s, const char* metric) {
  if (s.n_real() == 0 || s.n_fake() == 0)
    throw InputError(std::string(metric) + " needs both real and fake scores");
}

}  // namespace

std::size_t ScoreSet::n_real() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.label == Label::kReal; }));
}

std::size_t ScoreSet::n_fake() const { return entries.size() - n_real(); }

EerResult ComputeEer(const ScoreSet& s) {
  RequireBothClasses(s, "EER");
  for (const auto& e : s.entries)
    if (!std::isfinite(e.score)) throw InputError("non-finite score for '" + e.utterance_id + "'");

  std::vector<std::pair<double, Label>> sorted;
  sorted.reserve(s.entries.size());
  for (const auto& e : s.entries) sorted.emplace_back(e.score, e.label);
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  const double n_real = static_cast<double>(s.n_real());
  const double n_fake = static_cast<double>(s.n_fake());
  // Running counts of entries strictly below the current threshold.
  double real_below = 0.0, fake_below = 0.0;
  double prev_t = sorted.front().first, prev_far = 1.0, prev_frr = 0.0;

  std::size_t i = 0;
  while (true) {
    const bool at_end = i == sorted.size();
    const double t = at_end ? std::numeric_limits<double>::infinity() : sorted[i].first;
    const double far = (n_real - real_below) / n_real;
    const double frr = fake_below / n_fake;
    if (frr >= far) {
      const double d_prev = prev_far - prev_frr;
      const double d_cur = far - frr;
      const double frac = d_prev == d_cur ? 1.0 : d_prev / (d_prev - d_cur);
      EerResult r;
      r.eer = prev_far + frac * (far - prev_far);
      if (at_end)
        r.threshold = frac > 0.0 ? std::nextafter(prev_t, INFINITY) : prev_t;
      else
        r.threshold = prev_t + frac * (t - prev_t);
      return r;
    }
    prev_t = t;
    prev_far = far;
    prev_frr = frr;
    while (i < sorted.size() && sorted[i].first == t) {
      (sorted[i].second == Label::kReal ? real_below : fake_below) += 1.0;
      ++i;
    }
  }
}

double ComputeAuc(const ScoreSet& s) {
  RequireBothClasses(s, "AUC");
  std::vector<std::size_t> order(s.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.entries[a].score < s.entries[b].score; });
  double fake_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && s.entries[order[j]].score == s.entries[order[i]].score) ++j;
    // Ranks are 1-based; ties share the average rank.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (s.entries[order[k]].label == Label::kFake) fake_rank_sum += avg_rank;
    i = j;
  }
  const double n_fake = static_cast<double>(s.n_fake());
  const double n_real = static_cast<double>(s.n_real());
  return (fake_rank_sum - n_fake * (n_fake + 1.0) / 2.0) / (n_fake * n_real);
}

double ComputeAccuracy(const ScoreSet& s, double threshold) {
  if (s.entries.empty()) throw InputError("accuracy of an empty score set is undefined");
  std::size_t correct = 0;
  for (const auto& e : s.entries) correct += (e.score >= threshold) == (e.label == Label::kFake);
  return static_cast<double>(correct) / static_cast<double>(s.entries.size());
}

double ComputeAveragePrecision(const ScoreSet& s) {
  const auto n_pos = static_cast<double>(s.n_fake());
  if (n_pos == 0.0) throw InputError("average precision needs at least one fake entry");
  std::vector<std::size_t> order(s.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.entries[a].score > s.entries[b].score; });
  double ap = 0.0, tp = 0.0, seen = 0.0, prev_recall = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && s.entries[order[j]].score == s.entries[order[i]].score) {
      tp += s.entries[order[j]].label == Label::kFake;
      seen += 1.0;
      ++j;
    }
    const double recall = tp / n_pos;
    ap += (recall - prev_recall) * (tp / seen);
    prev_recall = recall;
    i = j;
  }
  return ap;
}

nlohmann::json MetricSummary::ToJson() const {
  return {{"eer", eer}, {"auc", auc}, {"acc", acc}, {"ap", ap},
          {"n_real", n_real}, {"n_fake", n_fake}, {"threshold", threshold}};
}

MetricSummary Summarize(const ScoreSet& s, double acc_threshold) {
  MetricSummary m;
  const auto e = ComputeEer(s);
  m.eer = e.eer;
  m.threshold = e.threshold;
  m.auc = ComputeAuc(s);
  m.acc = ComputeAccuracy(s, acc_threshold);
  m.ap = ComputeAveragePrecision(s);
  m.n_real = s.n_real();
  m.n_fake = s.n_fake();
  return m;
}

MetricSummary AverageSummaries(const std::vector<MetricSummary>& rows) {
  if (rows.empty()) throw InputError("cannot average zero datasets");
  MetricSummary avg;
  for (const auto& r : rows) {
    avg.eer += r.eer;
    avg.auc += r.auc;
    avg.acc += r.acc;
    avg.ap += r.ap;
    avg.threshold += r.threshold;
    avg.n_real += r.n_real;
    avg.n_fake += r.n_fake;
  }
  const auto n = static_cast<double>(rows.size());
  avg.eer /= n;
  avg.auc /= n;
  avg.acc /= n;
  avg.ap /= n;
  avg.threshold /= n;
  return avg;
}

std::string FormatScore(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void WriteScoreFile(const ScoreSet& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write score file '" + path.string() + "'");
  for (const auto& e : s.entries) out << e.utterance_id << ' ' << FormatScore(e.score) << '\n';
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::vector<std::pair<std::string, double>> ReadScoreFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score file '" + path.string() + "'");
  std::vector<std::pair<std::string, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id;
    double score;
    std::string extra;
    if (!(ss >> id >> score) || (ss >> extra))
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'utterance_id score'");
    rows.emplace_back(std::move(id), score);
  }
  return rows;
}

}  // namespace afss
