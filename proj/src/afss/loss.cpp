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

#include "afss/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afss/error.hpp"

namespace afss {

double ReweightingLossState::Squash(double w_tilde) {
  return Logistic(std::clamp(w_tilde, -kWeightLogitLimit, kWeightLogitLimit));
}

double ReweightingLossState::SquashGrad(double w_tilde) {
  if (std::abs(w_tilde) >= kWeightLogitLimit) return 0.0;
  const double s = Logistic(w_tilde);
  return s * (1.0 - s);
}

LossValue ReweightedBce(int y, double p, const ReweightingLossState& state) {
  const double pc = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  const bool clamped = pc != p;
  const double wf = state.w_fake();
  const double wr = state.w_real();
  LossValue out;
  if (y == 1) {
    out.loss = -wf * std::log(pc);
    out.d_p = clamped ? 0.0 : -wf / pc;
    out.d_w_tilde_fake = -std::log(pc) * ReweightingLossState::SquashGrad(state.w_tilde_fake);
  } else {
    out.loss = -wr * std::log1p(-pc);
    out.d_p = clamped ? 0.0 : wr / (1.0 - pc);
    out.d_w_tilde_real = -std::log1p(-pc) * ReweightingLossState::SquashGrad(state.w_tilde_real);
  }
  return out;
}

LossValue ReweightedBceFromLogit(int y, double logit, const ReweightingLossState& state) {
  const double p = Logistic(logit);
  LossValue out = ReweightedBce(y, p, state);
  out.d_p *= p * (1.0 - p);
  return out;
}

std::size_t BalancedBatchCount(std::size_t n_real, std::size_t n_fake, std::size_t batch_size) {
  if (batch_size < 2) return 0;
  return std::min(n_real, n_fake) / (batch_size / 2);
}

std::vector<std::vector<std::size_t>> BalancedBatches(const std::vector<SampleRecord>& records, std::size_t batch_size,
                                                      RngStream& rng) {
  if (batch_size < 2 || batch_size % 2 != 0) throw ConfigError("batch size must be even and at least 2");
  std::vector<std::size_t> real, fake;
  for (std::size_t i = 0; i < records.size(); ++i) (records[i].label == Label::kReal ? real : fake).push_back(i);
  if (real.empty() || fake.empty()) throw ConfigError("balanced sampling needs both bonafide and spoof records");
  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.Index(i)]);
  };
  shuffle(real);
  shuffle(fake);
  const std::size_t half = batch_size / 2;
  const std::size_t n = BalancedBatchCount(real.size(), fake.size(), batch_size);
  std::vector<std::vector<std::size_t>> batches(n);
  for (std::size_t b = 0; b < n; ++b) {
    auto& batch = batches[b];
    batch.insert(batch.end(), real.begin() + b * half, real.begin() + (b + 1) * half);
    batch.insert(batch.end(), fake.begin() + b * half, fake.begin() + (b + 1) * half);
  }
  return batches;
}

double LrAt(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double peak_lr, double final_lr) {
  if (step >= total_steps) return final_lr;
  if (step < warmup_steps) return peak_lr * double(step) / double(warmup_steps);
  if (total_steps == warmup_steps) return peak_lr;
  const double frac = double(step - warmup_steps) / double(total_steps - warmup_steps);
  return peak_lr + (final_lr - peak_lr) * frac;
}

AdamW::AdamW(std::vector<Parameter*> params, AdamWOptions opts) : params_(std::move(params)), opts_(opts) {
  slots_.reserve(params_.size());
  for (const Parameter* p : params_)
    slots_.push_back({Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()),
                      Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols())});
}

void AdamW::Step(double lr, std::size_t t) {
  if (t == 0) throw ConfigError("AdamW step counter is 1-based");
  const double c1 = 1.0 - std::pow(opts_.beta1, double(t));
  const double c2 = 1.0 - std::pow(opts_.beta2, double(t));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    Slot& s = slots_[i];
    p.value *= 1.0 - lr * opts_.weight_decay;
    s.m = opts_.beta1 * s.m + (1.0 - opts_.beta1) * p.grad;
    s.v = opts_.beta2 * s.v + (1.0 - opts_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + opts_.eps);
  }
}

}  // namespace afss
