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

#include "afss/training.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "afss/error.hpp"
#include "afss/parallel.hpp"

namespace afss {

namespace fs = std::filesystem;

namespace {

constexpr const char* kLossParam = "loss.w_tilde";

std::vector<Eigen::MatrixXd> PrepareAll(const FrontEnd& fe, const Manifest& m, int workers) {
  std::vector<Eigen::MatrixXd> out(m.records.size());
  ParallelFor(m.records.size(), workers, [&](std::size_t i) {
    const Waveform w = LoadPipelineAudio(m, m.records[i]);
    if (w.duration() < kMinDetectorSeconds)
      throw InputError(m.records[i].utterance_id + ": shorter than 0.1 s");
    out[i] = fe.Prepare(w);
  });
  return out;
}

ScoreSet ScorePrepared(const DetectorModel& model, const std::vector<SampleRecord>& records,
                       const std::vector<Eigen::MatrixXd>& inputs, int workers) {
  std::vector<double> p(records.size());
  ParallelFor(records.size(), workers, [&](std::size_t i) {
    p[i] = model.ForwardPrepared(inputs[i], false, nullptr, nullptr).p;
  });
  ScoreSet s;
  for (std::size_t i = 0; i < records.size(); ++i) s.Add(records[i].utterance_id, records[i].label, p[i]);
  return s;
}

void RequireBothClasses(const Manifest& m, const std::string& what) {
  bool real = false, fake = false;
  for (const auto& r : m.records) (r.label == Label::kReal ? real : fake) = true;
  if (!real || !fake) throw ValidationError(what + " manifest must contain both bonafide and spoof records");
}

nlohmann::json OptionalNumber(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double NumberOr(const nlohmann::json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

void RestoreTensor(Eigen::MatrixXd& dst, const Checkpoint& ckpt, const std::string& name) {
  const Eigen::MatrixXd& src = ckpt.Tensor(name);
  if (src.rows() != dst.rows() || src.cols() != dst.cols())
    throw FormatError("checkpoint tensor '" + name + "' has shape " + std::to_string(src.rows()) + "x" +
                      std::to_string(src.cols()) + ", model expects " + std::to_string(dst.rows()) + "x" +
                      std::to_string(dst.cols()));
  dst = src;
}

struct Optimizers {
  AdamW front, head, loss;
};

void AddOptimizerState(Checkpoint& ckpt, const AdamW& opt) {
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    ckpt.tensors["optim." + opt.params()[i]->name + ".m"] = opt.slots()[i].m;
    ckpt.tensors["optim." + opt.params()[i]->name + ".v"] = opt.slots()[i].v;
  }
}

void RestoreOptimizerState(const Checkpoint& ckpt, AdamW& opt) {
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    RestoreTensor(opt.slots()[i].m, ckpt, "optim." + opt.params()[i]->name + ".m");
    RestoreTensor(opt.slots()[i].v, ckpt, "optim." + opt.params()[i]->name + ".v");
  }
}

}  // namespace

void TrainConfig::Validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("training.") + name + " must be positive");
  };
  positive(lr_front, "lr_front");
  positive(lr_head, "lr_head");
  positive(lr_loss, "lr_loss");
  positive(final_lr, "final_lr");
  if (!(weight_decay >= 0.0)) throw ConfigError("training.weight_decay must be non-negative");
  if (max_epochs < 1) throw ConfigError("training.max_epochs must be at least 1");
  if (warmup_epochs < 0 || warmup_epochs >= max_epochs)
    throw ConfigError("training.warmup_epochs must satisfy 0 <= warmup_epochs < max_epochs");
  if (batch_size < 2 || batch_size % 2 != 0) throw ConfigError("training.batch_size must be even and at least 2");
  if (patience < 1) throw ConfigError("training.patience must be at least 1");
}

nlohmann::json EpochRecord::ToJson() const {
  return {{"epoch", epoch}, {"step", step},     {"train_loss", train_loss}, {"dev_eer", dev_eer},
          {"w_fake", w_fake}, {"w_real", w_real}, {"improved", improved}};
}

EpochRecord EpochRecord::FromJson(const nlohmann::json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.step = j.at("step").get<std::size_t>();
  r.train_loss = j.at("train_loss").get<double>();
  r.dev_eer = j.at("dev_eer").get<double>();
  r.w_fake = j.at("w_fake").get<double>();
  r.w_real = j.at("w_real").get<double>();
  r.improved = j.at("improved").get<bool>();
  return r;
}

std::vector<EpochRecord> ReadHistory(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open history " + path.string());
  std::vector<EpochRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(EpochRecord::FromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

Checkpoint ModelCheckpoint(DetectorModel& model) {
  Checkpoint ckpt;
  nlohmann::json arch = {{"front_end", model.front_end().name()},
                         {"d_front", model.front_end().dim()},
                         {"d_proj", model.head_options().d_proj},
                         {"dropout", model.head_options().dropout}};
  if (const auto* toy = dynamic_cast<const ToyFrontEnd*>(&model.front_end())) {
    const auto& o = toy->options();
    arch["toy"] = {{"n_mels", o.n_mels}, {"hidden", o.hidden}, {"n_fft", o.n_fft}, {"hop_length", o.hop_length}};
  }
  ckpt.header["model"] = arch;
  for (Parameter* p : model.parameters()) ckpt.tensors[p->name] = p->value;
  return ckpt;
}

DetectorModel LoadModel(const fs::path& path, const std::string& expected_front_end) {
  const Checkpoint ckpt = LoadCheckpoint(path);
  if (!ckpt.header.contains("model")) throw FormatError(path.string() + ": checkpoint lacks a model description");
  const auto& arch = ckpt.header["model"];
  const std::string fe = arch.at("front_end").get<std::string>();
  if (!expected_front_end.empty() && fe != expected_front_end)
    throw ConfigError(path.string() + ": checkpoint was trained with front end '" + fe + "' but the config selects '" +
                      expected_front_end + "'");
  ToyFrontEndOptions toy;
  if (arch.contains("toy")) {
    toy.n_mels = arch["toy"].at("n_mels").get<int>();
    toy.hidden = arch["toy"].at("hidden").get<int>();
    toy.n_fft = arch["toy"].at("n_fft").get<int>();
    toy.hop_length = arch["toy"].at("hop_length").get<int>();
  }
  toy.dim = arch.at("d_front").get<int>();
  HeadOptions head;
  head.d_proj = arch.at("d_proj").get<int>();
  head.dropout = arch.at("dropout").get<double>();
  DetectorModel model(MakeFrontEnd(fe, toy), head);
  for (Parameter* p : model.parameters()) RestoreTensor(p->value, ckpt, p->name);
  return model;
}

ScoreSet ScoreManifest(const DetectorModel& model, const Manifest& m, int workers) {
  return ScorePrepared(model, m.records, PrepareAll(model.front_end(), m, workers), workers);
}

TrainResult Train(DetectorModel& model, const Manifest& train, const Manifest& dev, const TrainOptions& opts) {
  const TrainConfig& cfg = opts.cfg;
  cfg.Validate();
  RequireBothClasses(train, "training");
  RequireBothClasses(dev, "dev");

  std::size_t n_real = 0;
  for (const auto& r : train.records) n_real += r.label == Label::kReal;
  const std::size_t per_epoch =
      BalancedBatchCount(n_real, train.records.size() - n_real, static_cast<std::size_t>(cfg.batch_size));
  if (per_epoch == 0) throw ConfigError("training set too small for one balanced batch of " + std::to_string(cfg.batch_size));
  const std::size_t total_steps = per_epoch * static_cast<std::size_t>(cfg.max_epochs);
  const std::size_t warmup_steps = per_epoch * static_cast<std::size_t>(cfg.warmup_epochs);

  const ParameterGroups groups = model.parameter_groups(!cfg.freeze_front_end);
  Parameter loss_param(kLossParam, 2, 1);
  const AdamWOptions adam{0.9, 0.999, 1e-8, cfg.weight_decay};
  Optimizers optim{AdamW(groups.front_end, adam), AdamW(groups.head, adam), AdamW({&loss_param}, adam)};

  const fs::path ckpt_dir = opts.run_dir / "checkpoints";
  const fs::path history_path = opts.run_dir / "history.jsonl";
  fs::create_directories(ckpt_dir);

  TrainResult result;
  result.best_checkpoint = ckpt_dir / "best.ckpt";
  result.last_checkpoint = ckpt_dir / "last.ckpt";
  int start_epoch = 1;
  std::size_t step = 0;
  double best_eer = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int since_best = 0;

  if (opts.resume && fs::exists(result.last_checkpoint)) {
    const Checkpoint ckpt = LoadCheckpoint(result.last_checkpoint);
    const auto& st = ckpt.header.at("train");
    if (st.at("seed").get<std::uint64_t>() != cfg.seed)
      throw ConfigError("cannot resume: checkpoint seed differs from the configured seed");
    for (Parameter* p : model.parameters()) RestoreTensor(p->value, ckpt, p->name);
    RestoreTensor(loss_param.value, ckpt, kLossParam);
    RestoreOptimizerState(ckpt, optim.front);
    RestoreOptimizerState(ckpt, optim.head);
    RestoreOptimizerState(ckpt, optim.loss);
    start_epoch = st.at("epoch").get<int>() + 1;
    step = st.at("step").get<std::size_t>();
    best_eer = NumberOr(st.at("best_eer"), best_eer);
    best_epoch = st.at("best_epoch").get<int>();
    since_best = st.at("epochs_since_best").get<int>();
    result.history = ReadHistory(history_path);
    result.history.resize(std::min<std::size_t>(result.history.size(), static_cast<std::size_t>(start_epoch - 1)));
    if (st.at("finished").get<bool>()) {
      result.best_eer = best_eer;
      result.best_epoch = best_epoch;
      result.early_stopped = since_best >= cfg.patience;
      result.completed = true;
      return result;
    }
  }
  {
    std::string text;
    for (const auto& r : result.history) text += r.ToJson().dump() + "\n";
    AtomicWrite(history_path, text);
  }

  const std::vector<Eigen::MatrixXd> train_inputs = PrepareAll(model.front_end(), train, opts.workers);
  const std::vector<Eigen::MatrixXd> dev_inputs = PrepareAll(model.front_end(), dev, opts.workers);

  auto save_state = [&](const fs::path& path, int epoch, bool finished) {
    Checkpoint ckpt = ModelCheckpoint(model);
    ckpt.header["train"] = {{"epoch", epoch},
                            {"step", step},
                            {"seed", cfg.seed},
                            {"best_eer", OptionalNumber(best_eer)},
                            {"best_epoch", best_epoch},
                            {"epochs_since_best", since_best},
                            {"finished", finished}};
    ckpt.header["config"] = opts.config_snapshot;
    ckpt.tensors[kLossParam] = loss_param.value;
    AddOptimizerState(ckpt, optim.front);
    AddOptimizerState(ckpt, optim.head);
    AddOptimizerState(ckpt, optim.loss);
    SaveCheckpoint(path, ckpt);
  };

  const double batch_n = static_cast<double>(cfg.batch_size);
  for (int epoch = start_epoch; epoch <= cfg.max_epochs; ++epoch) {
    RngStream sampler(cfg.seed, "epoch-" + std::to_string(epoch), "sampler");
    const auto batches = BalancedBatches(train.records, static_cast<std::size_t>(cfg.batch_size), sampler);
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      model.ZeroGrad();
      loss_param.ZeroGrad();
      const ReweightingLossState state{loss_param.value(0, 0), loss_param.value(1, 0)};
      double batch_loss = 0.0;
      for (std::size_t idx : batch) {
        const SampleRecord& rec = train.records[idx];
        RngStream dropout = RngStream(cfg.seed, rec.utterance_id, "dropout").Derive(std::to_string(step));
        ForwardCache cache;
        const ForwardResult fr = model.ForwardPrepared(train_inputs[idx], true, &dropout, &cache);
        const LossValue lv = ReweightedBceFromLogit(rec.label == Label::kFake ? 1 : 0, fr.logit, state);
        model.Backward(cache, lv.d_p / batch_n);
        loss_param.grad(0, 0) += lv.d_w_tilde_fake / batch_n;
        loss_param.grad(1, 0) += lv.d_w_tilde_real / batch_n;
        batch_loss += lv.loss / batch_n;
      }
      if (!std::isfinite(batch_loss)) {
        std::string ids;
        for (std::size_t idx : batch) ids += (ids.empty() ? "" : ", ") + train.records[idx].utterance_id;
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step) +
                            "; batch: " + ids);
      }
      loss_sum += batch_loss;
      const std::size_t t = step + 1;
      optim.front.Step(LrAt(step, total_steps, warmup_steps, cfg.lr_front, cfg.final_lr), t);
      optim.head.Step(LrAt(step, total_steps, warmup_steps, cfg.lr_head, cfg.final_lr), t);
      optim.loss.Step(LrAt(step, total_steps, warmup_steps, cfg.lr_loss, cfg.final_lr), t);
      ++step;
    }

    const double eer = ComputeEer(ScorePrepared(model, dev.records, dev_inputs, opts.workers)).eer;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = step;
    rec.train_loss = loss_sum / static_cast<double>(batches.size());
    rec.dev_eer = eer;
    const ReweightingLossState state{loss_param.value(0, 0), loss_param.value(1, 0)};
    rec.w_fake = state.w_fake();
    rec.w_real = state.w_real();
    rec.improved = eer < best_eer;
    if (rec.improved) {
      best_eer = eer;
      best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    const bool stop = since_best >= cfg.patience || epoch == cfg.max_epochs;
    if (rec.improved) save_state(result.best_checkpoint, epoch, stop);
    {
      std::ofstream out(history_path, std::ios::app);
      out << rec.ToJson().dump() << "\n";
      if (!out) throw IoError("cannot append to " + history_path.string());
    }
    save_state(result.last_checkpoint, epoch, stop);
    result.history.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(rec);
    if (since_best >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
    if (opts.stop_after_epoch && epoch == *opts.stop_after_epoch && epoch < cfg.max_epochs) {
      result.best_eer = best_eer;
      result.best_epoch = best_epoch;
      return result;
    }
  }
  result.best_eer = best_eer;
  result.best_epoch = best_epoch;
  result.completed = true;
  return result;
}

}  // namespace afss
