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

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "afss/audio.hpp"
#include "afss/rng.hpp"

namespace afss {

// A trainable tensor and its gradient accumulator. Frames are rows.
struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Eigen::MatrixXd::Zero(rows, cols)), grad(Eigen::MatrixXd::Zero(rows, cols)) {}
  Eigen::Index size() const { return value.size(); }
  void ZeroGrad() { grad.setZero(); }
};

struct ParameterGroups {
  std::vector<Parameter*> front_end;
  std::vector<Parameter*> head;
  std::vector<Parameter*> loss;
};

// Opaque per-call activation record kept for the backward pass.
struct FrontEndCache {
  virtual ~FrontEndCache() = default;
};

// Feature extractor producing [n_frames x dim()] from a waveform. Extraction
// is split into a fixed, cacheable Prepare step and a differentiable Forward.
class FrontEnd {
 public:
  virtual ~FrontEnd() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual bool trainable() const = 0;

  virtual Eigen::MatrixXd Prepare(const Waveform& w) const = 0;
  virtual Eigen::MatrixXd Forward(const Eigen::MatrixXd& input, std::unique_ptr<FrontEndCache>* cache) const = 0;
  // Accumulates parameter gradients given dL/d(output).
  virtual void Backward(const FrontEndCache& cache, const Eigen::MatrixXd& grad_out) = 0;
  virtual std::vector<Parameter*> parameters() = 0;
  virtual void Initialize(const RngStream& rng) = 0;

  Eigen::MatrixXd Extract(const Waveform& w) const { return Forward(Prepare(w), nullptr); }
};

struct ToyFrontEndOptions {
  int n_mels = 80;
  int hidden = 32;
  int dim = 1024;
  int n_fft = 512;
  int hop_length = 160;
};

// Log-mel frames -> conv1d(k=3) -> ReLU -> conv1d(k=3, stride 2) -> ReLU.
class ToyFrontEnd final : public FrontEnd {
 public:
  explicit ToyFrontEnd(ToyFrontEndOptions opts = {});

  std::string name() const override { return "toy"; }
  int dim() const override { return opts_.dim; }
  bool trainable() const override { return true; }
  const ToyFrontEndOptions& options() const { return opts_; }

  Eigen::MatrixXd Prepare(const Waveform& w) const override;
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& input, std::unique_ptr<FrontEndCache>* cache) const override;
  void Backward(const FrontEndCache& cache, const Eigen::MatrixXd& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&w1_, &b1_, &w2_, &b2_}; }
  void Initialize(const RngStream& rng) override;

 private:
  ToyFrontEndOptions opts_;
  Parameter w1_, b1_, w2_, b2_;
};

std::unique_ptr<FrontEnd> MakeFrontEnd(const std::string& name, const ToyFrontEndOptions& toy = {});

struct HeadOptions {
  int d_proj = 128;
  double dropout = 0.5;
  bool zero_init_dense = false;
};

struct ForwardResult {
  double logit = 0.0;
  double p = 0.5;
};

// Activations of one forward pass, needed by Backward.
struct ForwardCache {
  std::unique_ptr<FrontEndCache> front;
  Eigen::MatrixXd features;   // front-end output
  Eigen::MatrixXd hidden;     // after ReLU and dropout
  Eigen::MatrixXd mask;       // dropout keep-mask scaled by 1/(1-p); empty in eval mode
  Eigen::MatrixXd pre_relu;   // projection output
  Eigen::VectorXd pooled;
};

class DetectorModel {
 public:
  DetectorModel(std::unique_ptr<FrontEnd> front_end, HeadOptions head = {});

  FrontEnd& front_end() { return *front_; }
  const FrontEnd& front_end() const { return *front_; }
  const HeadOptions& head_options() const { return head_; }

  void Initialize(std::uint64_t seed);

  // Waveform entry point. Throws InputError below 0.1 s.
  ForwardResult Forward(const Waveform& w, bool train_mode, RngStream* dropout_rng = nullptr,
                        ForwardCache* cache = nullptr) const;
  // Entry from prepared front-end input (see FrontEnd::Prepare).
  ForwardResult ForwardPrepared(const Eigen::MatrixXd& input, bool train_mode, RngStream* dropout_rng,
                                ForwardCache* cache) const;
  // Entry from front-end features; used by the head-only checks.
  ForwardResult ForwardFeatures(const Eigen::MatrixXd& features, bool train_mode, RngStream* dropout_rng,
                                ForwardCache* cache) const;

  // Accumulates gradients of a scalar loss given dL/dlogit.
  void Backward(const ForwardCache& cache, double grad_logit);

  ParameterGroups parameter_groups(bool include_front_end = true);
  std::vector<Parameter*> parameters();
  std::size_t parameter_count();
  void ZeroGrad();

 private:
  std::unique_ptr<FrontEnd> front_;
  HeadOptions head_;
  Parameter proj_w_, proj_b_, dense_w_, dense_b_;
};

double Logistic(double z);

inline constexpr double kMinDetectorSeconds = 0.1;

}  // namespace afss
