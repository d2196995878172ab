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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "afss/detector.hpp"
#include "afss/error.hpp"
#include "afss/loss.hpp"
#include "doctest.h"
#include "support/finite_diff.hpp"
#include "support/oracles.hpp"

using afss::DetectorModel;
using afss::RngStream;
using afss::Waveform;
namespace t = afss::testing;

namespace {

DetectorModel TinyModel(std::uint64_t seed, bool zero_dense = false) {
  afss::ToyFrontEndOptions fe;
  fe.n_mels = 6;
  fe.hidden = 3;
  fe.dim = 8;
  afss::HeadOptions head;
  head.d_proj = 5;
  head.zero_init_dense = zero_dense;
  DetectorModel m(std::make_unique<afss::ToyFrontEnd>(fe), head);
  m.Initialize(seed);
  return m;
}

Eigen::MatrixXd RandomInput(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  RngStream rng(seed, "input", "test");
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  return x;
}

}  // namespace

TEST_CASE("detector: zero-initialized dense layer gives p = 0.5 for any input") {
  DetectorModel m(std::make_unique<afss::ToyFrontEnd>(), afss::HeadOptions{128, 0.5, true});
  m.Initialize(1);
  for (double seconds : {0.1, 0.7, 2.0}) {
    const Waveform w(t::WhiteNoise(static_cast<std::size_t>(seconds * 16000), 0.1, 3), 16000);
    const auto r = m.Forward(w, false);
    CHECK(r.logit == 0.0);
    CHECK(r.p == 0.5);
  }
}

TEST_CASE("detector: eval mode is deterministic and length-agnostic") {
  DetectorModel m(std::make_unique<afss::ToyFrontEnd>());
  m.Initialize(2);
  const Waveform a(t::Tone(300.0, 0.5), 16000);
  const Waveform b(t::Tone(300.0, 1.3), 16000);
  const auto r1 = m.Forward(a, false);
  const auto r2 = m.Forward(a, false);
  CHECK(r1.logit == r2.logit);
  const auto r3 = m.Forward(b, false);
  CHECK(std::isfinite(r3.logit));
  CHECK(r3.p > 0.0);
  CHECK(r3.p < 1.0);
  CHECK(m.front_end().Extract(a).cols() == 1024);
}

TEST_CASE("detector: train mode applies dropout from the supplied stream") {
  DetectorModel m(std::make_unique<afss::ToyFrontEnd>());
  m.Initialize(2);
  const Waveform a(t::Tone(300.0, 0.5), 16000);
  RngStream r1(1, "a", "dropout"), r2(1, "a", "dropout"), r3(2, "a", "dropout");
  const double l1 = m.Forward(a, true, &r1).logit;
  CHECK(l1 == m.Forward(a, true, &r2).logit);
  CHECK(l1 != m.Forward(a, true, &r3).logit);
  CHECK(l1 != m.Forward(a, false).logit);
  CHECK_THROWS_AS(m.Forward(a, true), afss::ConfigError);
}

TEST_CASE("detector: too-short input is rejected") {
  DetectorModel m(std::make_unique<afss::ToyFrontEnd>());
  m.Initialize(1);
  CHECK_THROWS_AS(m.Forward(Waveform(std::vector<double>(1599, 0.1), 16000), false), afss::InputError);
  CHECK_NOTHROW(m.Forward(Waveform(std::vector<double>(1600, 0.1), 16000), false));
}

TEST_CASE("detector: projection contract is 1024 -> 128") {
  DetectorModel m(std::make_unique<afss::ToyFrontEnd>());
  const auto groups = m.parameter_groups();
  CHECK(groups.head[0]->value.rows() == 1024);
  CHECK(groups.head[0]->value.cols() == 128);
  CHECK(groups.head[2]->value.rows() == 128);
  CHECK(groups.head[2]->value.cols() == 1);
}

TEST_CASE("detector: parameter groups partition the parameters") {
  DetectorModel m(std::make_unique<afss::ToyFrontEnd>());
  auto g = m.parameter_groups();
  std::set<const afss::Parameter*> seen;
  std::size_t total = 0;
  for (const auto* group : {&g.front_end, &g.head, &g.loss})
    for (const afss::Parameter* p : *group) {
      CHECK(seen.insert(p).second);
      total += static_cast<std::size_t>(p->size());
    }
  CHECK(total == m.parameter_count());
  CHECK(g.loss.empty());

  const auto frozen = m.parameter_groups(false);
  CHECK(frozen.front_end.empty());
  for (const afss::Parameter* p : frozen.head) CHECK(std::find(g.front_end.begin(), g.front_end.end(), p) == g.front_end.end());
}

TEST_CASE("detector: mean pooling ignores frame order") {
  DetectorModel m = TinyModel(4);
  Eigen::MatrixXd f = RandomInput(9, 8, 1).cwiseAbs();
  const double base = m.ForwardFeatures(f, false, nullptr, nullptr).logit;
  std::vector<Eigen::Index> order(9);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::rotate(order.begin(), order.begin() + 3, order.end());
  Eigen::MatrixXd g(f.rows(), f.cols());
  for (Eigen::Index i = 0; i < f.rows(); ++i) g.row(i) = f.row(order[i]);
  CHECK(std::abs(m.ForwardFeatures(g, false, nullptr, nullptr).logit - base) < 1e-12);
}

TEST_CASE("detector: analytic gradients match central differences") {
  DetectorModel m = TinyModel(9);
  const Eigen::MatrixXd input = RandomInput(8, 6, 2);
  const afss::ReweightingLossState state{0.3, -0.4};

  for (int y : {0, 1}) {
    auto loss = [&] {
      RngStream drop(5, "utt", "dropout");
      return afss::ReweightedBceFromLogit(y, m.ForwardPrepared(input, true, &drop, nullptr).logit, state).loss;
    };
    m.ZeroGrad();
    RngStream drop(5, "utt", "dropout");
    afss::ForwardCache cache;
    const auto r = m.ForwardPrepared(input, true, &drop, &cache);
    CHECK(cache.features.rows() == 4);
    CHECK(cache.features.cols() == 8);
    m.Backward(cache, afss::ReweightedBceFromLogit(y, r.logit, state).d_p);

    int checked = 0;
    for (afss::Parameter* p : m.parameters()) {
      for (Eigen::Index i = 0; i < p->value.size(); ++i) {
        double& v = p->value.data()[i];
        const double saved = v;
        const double numeric = t::CentralDifference([&](double x) { v = x; return loss(); }, saved);
        v = saved;
        const double analytic = p->grad.data()[i];
        INFO(p->name << "[" << i << "] analytic " << analytic << " numeric " << numeric);
        CHECK(std::abs(analytic - numeric) <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric)) + 1e-9);
        ++checked;
      }
    }
    CHECK(checked == static_cast<int>(m.parameter_count()));
  }
}
