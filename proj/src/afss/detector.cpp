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

#include "afss/detector.hpp"

#include <cmath>

#include "afss/error.hpp"
#include "afss/spectral.hpp"

namespace afss {
namespace {

constexpr int kKernel = 3;
constexpr double kLogFloor = 1e-4;

// Zero-padded kernel-3 im2col: row t holds input frames t*stride-1 .. t*stride+1.
Eigen::MatrixXd Im2Col(const Eigen::MatrixXd& x, int stride) {
  const Eigen::Index t_in = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index t_out = (t_in - 1) / stride + 1;
  Eigen::MatrixXd col = Eigen::MatrixXd::Zero(t_out, kKernel * d);
  for (Eigen::Index t = 0; t < t_out; ++t) {
    for (int j = 0; j < kKernel; ++j) {
      const Eigen::Index src = t * stride + j - 1;
      if (src >= 0 && src < t_in) col.block(t, j * d, 1, d) = x.row(src);
    }
  }
  return col;
}

Eigen::MatrixXd Col2Im(const Eigen::MatrixXd& dcol, Eigen::Index t_in, Eigen::Index d, int stride) {
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(t_in, d);
  for (Eigen::Index t = 0; t < dcol.rows(); ++t) {
    for (int j = 0; j < kKernel; ++j) {
      const Eigen::Index src = t * stride + j - 1;
      if (src >= 0 && src < t_in) dx.row(src) += dcol.block(t, j * d, 1, d);
    }
  }
  return dx;
}

Eigen::MatrixXd Affine(const Eigen::MatrixXd& x, const Parameter& w, const Parameter& b) {
  Eigen::MatrixXd out = x * w.value;
  out.rowwise() += b.value.row(0);
  return out;
}

void FillUniform(Parameter& p, double bound, const RngStream& parent) {
  RngStream rng = parent.Derive(p.name);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.Uniform(-bound, bound);
}

struct ToyCache final : FrontEndCache {
  Eigen::MatrixXd col1, a1, col2, a2;
  Eigen::Index t_in = 0;
};

}  // namespace

double Logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ToyFrontEnd::ToyFrontEnd(ToyFrontEndOptions opts)
    : opts_(opts),
      w1_("front.conv1.weight", kKernel * opts.n_mels, opts.hidden),
      b1_("front.conv1.bias", 1, opts.hidden),
      w2_("front.conv2.weight", kKernel * opts.hidden, opts.dim),
      b2_("front.conv2.bias", 1, opts.dim) {
  if (opts.n_mels < 1 || opts.hidden < 1 || opts.dim < 1) throw ConfigError("toy front end: dimensions must be positive");
}

Eigen::MatrixXd ToyFrontEnd::Prepare(const Waveform& w) const {
  const MelSpectrogram mel = MelEncode(w, opts_.n_mels, opts_.n_fft, opts_.hop_length);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(mel.n_frames), opts_.n_mels);
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    for (Eigen::Index m = 0; m < x.cols(); ++m) x(t, m) = 0.25 * std::log(mel.at(t, m) + kLogFloor);
  return x;
}

Eigen::MatrixXd ToyFrontEnd::Forward(const Eigen::MatrixXd& input, std::unique_ptr<FrontEndCache>* cache) const {
  if (input.cols() != opts_.n_mels) throw InputError("toy front end: expected " + std::to_string(opts_.n_mels) + " input channels");
  if (input.rows() < 1) throw InputError("toy front end: empty input");
  auto c = std::make_unique<ToyCache>();
  c->t_in = input.rows();
  c->col1 = Im2Col(input, 1);
  c->a1 = Affine(c->col1, w1_, b1_);
  c->col2 = Im2Col(c->a1.cwiseMax(0.0), 2);
  c->a2 = Affine(c->col2, w2_, b2_);
  Eigen::MatrixXd out = c->a2.cwiseMax(0.0);
  if (cache) *cache = std::move(c);
  return out;
}

void ToyFrontEnd::Backward(const FrontEndCache& base, const Eigen::MatrixXd& grad_out) {
  const auto& c = dynamic_cast<const ToyCache&>(base);
  const Eigen::MatrixXd da2 = grad_out.cwiseProduct((c.a2.array() > 0.0).cast<double>().matrix());
  w2_.grad.noalias() += c.col2.transpose() * da2;
  b2_.grad += da2.colwise().sum();
  const Eigen::MatrixXd dh1 = Col2Im(da2 * w2_.value.transpose(), c.a1.rows(), opts_.hidden, 2);
  const Eigen::MatrixXd da1 = dh1.cwiseProduct((c.a1.array() > 0.0).cast<double>().matrix());
  w1_.grad.noalias() += c.col1.transpose() * da1;
  b1_.grad += da1.colwise().sum();
}

void ToyFrontEnd::Initialize(const RngStream& rng) {
  FillUniform(w1_, 1.0 / std::sqrt(double(w1_.value.rows())), rng);
  FillUniform(b1_, 1.0 / std::sqrt(double(w1_.value.rows())), rng);
  FillUniform(w2_, 1.0 / std::sqrt(double(w2_.value.rows())), rng);
  FillUniform(b2_, 1.0 / std::sqrt(double(w2_.value.rows())), rng);
}

std::unique_ptr<FrontEnd> MakeFrontEnd(const std::string& name, const ToyFrontEndOptions& toy) {
  if (name == "toy") return std::make_unique<ToyFrontEnd>(toy);
  throw ConfigError("unknown front end '" + name + "' (available: toy)");
}

DetectorModel::DetectorModel(std::unique_ptr<FrontEnd> front_end, HeadOptions head)
    : front_(std::move(front_end)),
      head_(head),
      proj_w_("head.projection.weight", front_ ? front_->dim() : 0, head.d_proj),
      proj_b_("head.projection.bias", 1, head.d_proj),
      dense_w_("head.dense.weight", head.d_proj, 1),
      dense_b_("head.dense.bias", 1, 1) {
  if (!front_) throw ConfigError("detector: missing front end");
  if (head.d_proj < 1) throw ConfigError("detector: projection width must be positive");
  if (!(head.dropout >= 0.0 && head.dropout < 1.0)) throw ConfigError("detector: dropout must lie in [0, 1)");
}

void DetectorModel::Initialize(std::uint64_t seed) {
  const RngStream rng(seed, "model", "init");
  front_->Initialize(rng.Derive("front"));
  const double proj_bound = 1.0 / std::sqrt(double(front_->dim()));
  FillUniform(proj_w_, proj_bound, rng);
  FillUniform(proj_b_, proj_bound, rng);
  if (head_.zero_init_dense) {
    dense_w_.value.setZero();
    dense_b_.value.setZero();
  } else {
    const double dense_bound = 1.0 / std::sqrt(double(head_.d_proj));
    FillUniform(dense_w_, dense_bound, rng);
    FillUniform(dense_b_, dense_bound, rng);
  }
}

ForwardResult DetectorModel::Forward(const Waveform& w, bool train_mode, RngStream* dropout_rng,
                                     ForwardCache* cache) const {
  if (w.sample_rate <= 0 || w.duration() < kMinDetectorSeconds)
    throw InputError("detector: input shorter than 0.1 s");
  return ForwardPrepared(front_->Prepare(w), train_mode, dropout_rng, cache);
}

ForwardResult DetectorModel::ForwardPrepared(const Eigen::MatrixXd& input, bool train_mode, RngStream* dropout_rng,
                                             ForwardCache* cache) const {
  std::unique_ptr<FrontEndCache> front_cache;
  Eigen::MatrixXd features = front_->Forward(input, cache ? &front_cache : nullptr);
  const ForwardResult r = ForwardFeatures(features, train_mode, dropout_rng, cache);
  if (cache) cache->front = std::move(front_cache);
  return r;
}

ForwardResult DetectorModel::ForwardFeatures(const Eigen::MatrixXd& features, bool train_mode, RngStream* dropout_rng,
                                             ForwardCache* cache) const {
  if (features.cols() != front_->dim()) throw InputError("detector: feature width does not match the projection");
  if (features.rows() < 1) throw InputError("detector: no frames");
  Eigen::MatrixXd pre = Affine(features, proj_w_, proj_b_);
  Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  Eigen::MatrixXd mask;
  if (train_mode && head_.dropout > 0.0) {
    if (!dropout_rng) throw ConfigError("detector: train mode needs a dropout stream");
    const double keep = 1.0 - head_.dropout;
    mask.resize(hidden.rows(), hidden.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = dropout_rng->Bernoulli(keep) ? 1.0 / keep : 0.0;
    hidden = hidden.cwiseProduct(mask);
  }
  Eigen::VectorXd pooled = hidden.colwise().mean().transpose();
  ForwardResult r;
  r.logit = pooled.dot(dense_w_.value.col(0)) + dense_b_.value(0, 0);
  r.p = Logistic(r.logit);
  if (cache) {
    cache->features = std::move(features);
    cache->pre_relu = std::move(pre);
    cache->hidden = std::move(hidden);
    cache->mask = std::move(mask);
    cache->pooled = std::move(pooled);
  }
  return r;
}

void DetectorModel::Backward(const ForwardCache& c, double grad_logit) {
  dense_w_.grad.col(0) += grad_logit * c.pooled;
  dense_b_.grad(0, 0) += grad_logit;
  const Eigen::Index t = c.pre_relu.rows();
  Eigen::RowVectorXd dpooled = (grad_logit / double(t)) * dense_w_.value.col(0).transpose();
  Eigen::MatrixXd dpre = dpooled.replicate(t, 1);
  if (c.mask.size() > 0) dpre = dpre.cwiseProduct(c.mask);
  dpre = dpre.cwiseProduct((c.pre_relu.array() > 0.0).cast<double>().matrix());
  proj_w_.grad.noalias() += c.features.transpose() * dpre;
  proj_b_.grad += dpre.colwise().sum();
  if (front_->trainable() && c.front) front_->Backward(*c.front, dpre * proj_w_.value.transpose());
}

ParameterGroups DetectorModel::parameter_groups(bool include_front_end) {
  ParameterGroups g;
  if (include_front_end && front_->trainable()) g.front_end = front_->parameters();
  g.head = {&proj_w_, &proj_b_, &dense_w_, &dense_b_};
  return g;
}

std::vector<Parameter*> DetectorModel::parameters() {
  auto out = front_->parameters();
  for (Parameter* p : {&proj_w_, &proj_b_, &dense_w_, &dense_b_}) out.push_back(p);
  return out;
}

std::size_t DetectorModel::parameter_count() {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

void DetectorModel::ZeroGrad() {
  for (Parameter* p : parameters()) p->ZeroGrad();
}

}  // namespace afss
