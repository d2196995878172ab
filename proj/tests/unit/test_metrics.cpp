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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "afss/error.hpp"
#include "afss/metrics.hpp"
#include "doctest.h"
#include "support/metric_oracles.hpp"

using afss::Label;
using afss::ScoreSet;
namespace t = afss::testing;

namespace {

ScoreSet FromLists(const std::vector<double>& real, const std::vector<double>& fake) {
  ScoreSet s;
  int i = 0;
  for (double v : real) s.Add("r" + std::to_string(i++), Label::kReal, v);
  for (double v : fake) s.Add("f" + std::to_string(i++), Label::kFake, v);
  return s;
}

ScoreSet Flipped(ScoreSet s) {
  for (auto& e : s.entries) e.label = e.label == Label::kReal ? Label::kFake : Label::kReal;
  return s;
}

}  // namespace

TEST_CASE("eer: perfect separation is zero") {
  const auto r = afss::ComputeEer(FromLists({0.1, 0.2, 0.3}, {0.7, 0.8}));
  CHECK(r.eer == 0.0);
  CHECK(r.threshold > 0.3);
  CHECK(r.threshold <= 0.7);
}

TEST_CASE("eer: worked example crosses at one third") {
  const auto s = FromLists({0.1, 0.2, 0.6}, {0.3, 0.7, 0.9});
  const auto r = afss::ComputeEer(s);
  CHECK(r.eer == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(r.threshold > 0.3);
  CHECK(r.threshold <= 0.6);
  const auto brute = t::BruteForceEer(s);
  CHECK(r.eer == doctest::Approx(brute.eer).epsilon(1e-12));
}

TEST_CASE("eer: inverted labels agree with the brute-force sweep") {
  const auto s = Flipped(FromLists({0.1, 0.2, 0.6}, {0.3, 0.7, 0.9}));
  const auto r = afss::ComputeEer(s);
  const auto brute = t::BruteForceEer(s);
  CHECK(r.eer == doctest::Approx(brute.eer).epsilon(1e-12));
  CHECK(r.eer == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Fully inverted separation pushes the crossing past the top score.
  const auto worst = afss::ComputeEer(FromLists({0.8, 0.9}, {0.1, 0.2}));
  CHECK(worst.eer == doctest::Approx(1.0));
}

TEST_CASE("eer: invariant under strictly monotone score maps") {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 200; ++i) {
    auto s = t::RandomScoreSet(gen, 50, i % 2 == 0);
    const double base = afss::ComputeEer(s).eer;
    auto affine = s, squashed = s;
    for (auto& e : affine.entries) e.score = 2.0 * e.score + 1.0;
    for (auto& e : squashed.entries) e.score = std::tanh(e.score);
    CHECK(std::abs(afss::ComputeEer(affine).eer - base) <= 1e-12);
    CHECK(std::abs(afss::ComputeEer(squashed).eer - base) <= 1e-12);
  }
}

TEST_CASE("eer/auc/ap need the right classes") {
  CHECK_THROWS_AS(afss::ComputeEer(FromLists({0.1}, {})), afss::InputError);
  CHECK_THROWS_AS(afss::ComputeAuc(FromLists({}, {0.1})), afss::InputError);
  CHECK_THROWS_AS(afss::ComputeAveragePrecision(FromLists({0.1}, {})), afss::InputError);
  CHECK_THROWS_AS(afss::ComputeEer(ScoreSet{}), afss::InputError);
}

TEST_CASE("auc: closed cases") {
  CHECK(afss::ComputeAuc(FromLists({0.1, 0.2}, {0.5, 0.6})) == 1.0);
  CHECK(afss::ComputeAuc(FromLists({0.4, 0.4, 0.4}, {0.4, 0.4})) == 0.5);
}

TEST_CASE("auc: flipping labels complements a tie-free AUC") {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 100; ++i) {
    const auto s = t::RandomScoreSet(gen, 50, false);
    CHECK(afss::ComputeAuc(s) + afss::ComputeAuc(Flipped(s)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("auc and ap match brute force on 200-entry sets") {
  std::mt19937_64 gen(200);
  for (bool ties : {false, true}) {
    const auto s = t::RandomScoreSet(gen, 200, ties);
    CHECK(std::abs(afss::ComputeAuc(s) - t::BruteForceAuc(s)) <= 1e-12);
    CHECK(std::abs(afss::ComputeAveragePrecision(s) - t::BruteForceAp(s)) <= 1e-12);
  }
}

TEST_CASE("ap: closed cases") {
  CHECK(afss::ComputeAveragePrecision(FromLists({0.1, 0.2, 0.3}, {0.7, 0.8, 0.9})) == 1.0);
  for (int n : {2, 5, 10}) {
    std::vector<double> reals;
    for (int i = 0; i < n - 1; ++i) reals.push_back(1.0 + i);
    CHECK(afss::ComputeAveragePrecision(FromLists(reals, {0.0})) == doctest::Approx(1.0 / n));
  }
  // Reversed perfect ranking: analytic minimum sum_k (1/F) * k / (R + k).
  const int R = 4, F = 3;
  double expected = 0.0;
  for (int k = 1; k <= F; ++k) expected += (1.0 / F) * k / static_cast<double>(R + k);
  CHECK(afss::ComputeAveragePrecision(FromLists({5, 6, 7, 8}, {1, 2, 3})) == doctest::Approx(expected));
}

TEST_CASE("ap is invariant to the order of tied entries") {
  auto s = FromLists({0.5, 0.5, 0.2}, {0.5, 0.9});
  const double a = afss::ComputeAveragePrecision(s);
  std::reverse(s.entries.begin(), s.entries.end());
  CHECK(afss::ComputeAveragePrecision(s) == a);
}

TEST_CASE("accuracy") {
  CHECK(afss::ComputeAccuracy(FromLists({0.1, 0.2}, {0.8, 0.9})) == 1.0);
  const auto s = FromLists({0.1, 0.2, 0.3}, {0.8});
  CHECK(afss::ComputeAccuracy(s, 2.0) == doctest::Approx(0.75));
  std::mt19937_64 gen(4);
  const auto r = t::RandomScoreSet(gen, 100, false);
  int correct = 0;
  for (const auto& e : r.entries) correct += (e.label == Label::kFake) == (e.score >= 0.7);
  CHECK(afss::ComputeAccuracy(r, 0.7) == doctest::Approx(correct / double(r.entries.size())));
  CHECK_THROWS_AS(afss::ComputeAccuracy(ScoreSet{}), afss::InputError);
}

TEST_CASE("summary json keys and averaging") {
  const auto a = afss::Summarize(FromLists({0.1, 0.2, 0.6}, {0.3, 0.7, 0.9}));
  const auto b = afss::Summarize(FromLists({0.1, 0.2}, {0.8, 0.9}));
  const auto j = a.ToJson();
  for (const char* key : {"eer", "auc", "acc", "ap", "n_real", "n_fake", "threshold"}) CHECK(j.contains(key));
  const auto avg = afss::AverageSummaries({a, b});
  CHECK(avg.eer == doctest::Approx((a.eer + b.eer) / 2));
  CHECK(afss::AverageSummaries({a}).eer == a.eer);
}

TEST_CASE("score file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "afss_scores.txt";
  const auto s = FromLists({0.125, -3.5}, {0.75});
  afss::WriteScoreFile(s, path);
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  CHECK(content == "r0 0.125\nr1 -3.5\nf2 0.75\n");
  const auto rows = afss::ReadScoreFile(path);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].second == -3.5);
  std::ofstream(path) << "a 0.1 extra\n";
  CHECK_THROWS_AS(afss::ReadScoreFile(path), afss::FormatError);
}
