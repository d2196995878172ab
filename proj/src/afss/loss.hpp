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
#include <vector>

#include "afss/detector.hpp"
#include "afss/manifest.hpp"
#include "afss/rng.hpp"

namespace afss {

inline constexpr double kProbabilityEpsilon = 1e-7;

// Beyond this magnitude the sigmoid rounds to 0 or 1 in double precision and
// the open weight intervals would collapse, so w~ saturates here.
inline constexpr double kWeightLogitLimit = 30.0;

// Trainable class weights: w_fake = 1 + sigmoid(w~_fake), w_real = sigmoid(w~_real).
struct ReweightingLossState {
  double w_tilde_fake = 0.0;
  double w_tilde_real = 0.0;

  static double Squash(double w_tilde);
  // d Squash / d w~; zero in the saturated region.
  static double SquashGrad(double w_tilde);

  double w_fake() const { return 1.0 + Squash(w_tilde_fake); }
  double w_real() const { return Squash(w_tilde_real); }
};

struct LossValue {
  double loss = 0.0;
  double d_p = 0.0;            // zero where p was clamped
  double d_w_tilde_fake = 0.0;
  double d_w_tilde_real = 0.0;
};

// -[w_fake*y*log p + w_real*(1-y)*log(1-p)], p clamped to [eps, 1-eps]. y = 1 is fake.
LossValue ReweightedBce(int y, double p, const ReweightingLossState& state);

// Same loss as a function of the logit; d_p holds dL/dlogit here.
LossValue ReweightedBceFromLogit(int y, double logit, const ReweightingLossState& state);

// Balanced mini-batches of record indices: each holds batch_size/2 of each
// class, pools are drawn without replacement and the epoch ends when either
// pool cannot fill another half batch.
std::vector<std::vector<std::size_t>> BalancedBatches(const std::vector<SampleRecord>& records, std::size_t batch_size,
                                                      RngStream& rng);

// Number of batches BalancedBatches emits for the given class counts.
std::size_t BalancedBatchCount(std::size_t n_real, std::size_t n_fake, std::size_t batch_size);

// Linear warmup 0 -> peak_lr over warmup_steps, then linear decay to final_lr at total_steps.
double LrAt(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double peak_lr, double final_lr);

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// Decoupled-weight-decay Adam over a fixed list of parameters.
class AdamW {
 public:
  struct Slot {
    Eigen::MatrixXd m;
    Eigen::MatrixXd v;
  };

  AdamW(std::vector<Parameter*> params, AdamWOptions opts = {});

  // One update at learning rate lr; t is the 1-based step used for bias correction.
  void Step(double lr, std::size_t t);

  const std::vector<Parameter*>& params() const { return params_; }
  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }
  const AdamWOptions& options() const { return opts_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Slot> slots_;
  AdamWOptions opts_;
};

}  // namespace afss
