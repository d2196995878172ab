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

#include "afss/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "afss/backends.hpp"
#include "afss/error.hpp"

namespace afss {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

const char* const kPresetKeys[] = {"pitch_shift", "time_stretch", "tanh_distortion"};

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string FormatInterval(const Interval& i) { return "[" + FormatDouble(i.lo) + ", " + FormatDouble(i.hi) + "]"; }

std::string Join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

pt::ptree::path_type Key(const std::string& k) { return pt::ptree::path_type(k, '\0'); }

// Reads typed values out of one INI section and remembers which keys were used.
class SectionReader {
 public:
  SectionReader(const pt::ptree* tree, std::string section, std::string origin)
      : tree_(tree), section_(std::move(section)), origin_(std::move(origin)) {}

  void Check(const std::set<std::string>& extra_prefixes = {}) const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!child.empty()) throw Fail(key, "nested sections are not supported");
      if (used_.count(key)) continue;
      bool prefixed = false;
      for (const auto& p : extra_prefixes) prefixed |= key.rfind(p, 0) == 0;
      if (!prefixed) throw Fail(key, "unknown key");
    }
  }

  std::optional<std::string> Raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return Trim(it->second.data());
  }

  void Int(const std::string& key, int& out) {
    if (auto v = Raw(key)) {
      int x = 0;
      const auto r = std::from_chars(v->data(), v->data() + v->size(), x);
      if (r.ec != std::errc() || r.ptr != v->data() + v->size()) throw Fail(key, "expected an integer, got '" + *v + "'");
      out = x;
    }
  }

  void U64(const std::string& key, std::uint64_t& out) {
    if (auto v = Raw(key)) {
      std::uint64_t x = 0;
      const auto r = std::from_chars(v->data(), v->data() + v->size(), x);
      if (r.ec != std::errc() || r.ptr != v->data() + v->size())
        throw Fail(key, "expected a non-negative integer, got '" + *v + "'");
      out = x;
    }
  }

  void Double(const std::string& key, double& out) {
    if (auto v = Raw(key)) out = ParseDouble(key, *v);
  }

  void Bool(const std::string& key, bool& out) {
    if (auto v = Raw(key)) {
      if (*v == "true") out = true;
      else if (*v == "false") out = false;
      else throw Fail(key, "expected true or false, got '" + *v + "'");
    }
  }

  void String(const std::string& key, std::string& out) {
    if (auto v = Raw(key)) out = *v;
  }

  void List(const std::string& key, std::vector<std::string>& out) {
    if (auto v = Raw(key)) {
      out.clear();
      if (v->empty()) return;
      std::stringstream ss(*v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = Trim(item);
        if (item.empty()) throw Fail(key, "empty list item");
        out.push_back(item);
      }
    }
  }

  void Range(const std::string& key, Interval& out) {
    if (auto v = Raw(key)) {
      if (v->size() < 2 || v->front() != '[' || v->back() != ']')
        throw Fail(key, "expected an interval [lo, hi], got '" + *v + "'");
      const std::string body = v->substr(1, v->size() - 2);
      const auto comma = body.find(',');
      if (comma == std::string::npos || body.find(',', comma + 1) != std::string::npos)
        throw Fail(key, "expected an interval [lo, hi], got '" + *v + "'");
      out.lo = ParseDouble(key, Trim(body.substr(0, comma)));
      out.hi = ParseDouble(key, Trim(body.substr(comma + 1)));
      if (out.lo > out.hi) throw Fail(key, "interval lower bound exceeds upper bound");
    }
  }

  ConfigError Fail(const std::string& key, const std::string& msg) const {
    return ConfigError(origin_ + ": " + (section_.empty() ? "" : "[" + section_ + "] ") + key + ": " + msg);
  }

  const pt::ptree* tree() const { return tree_; }

 private:
  double ParseDouble(const std::string& key, const std::string& v) const {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
      throw Fail(key, "expected a finite number, got '" + v + "'");
    return x;
  }

  const pt::ptree* tree_;
  std::string section_;
  std::string origin_;
  std::set<std::string> used_;
};

ExperimentConfig FromTree(const pt::ptree& tree, const std::string& origin) {
  static const std::set<std::string> kSections = {"transforms", "rawboost", "synthesis", "backends",
                                                  "detector",   "training", "paths"};
  ExperimentConfig c;
  pt::ptree top_level;
  for (const auto& [key, child] : tree) {
    if (child.empty()) {
      top_level.push_back({key, child});
    } else if (!kSections.count(key)) {
      throw ConfigError(origin + ": unknown section [" + key + "]");
    }
  }
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return SectionReader(it == tree.not_found() ? nullptr : &it->second, name, origin);
  };

  SectionReader top(&top_level, "", origin);
  top.U64("seed", c.seed);
  top.Check();

  SectionReader tr = section("transforms");
  tr.Int("level", c.level);
  for (int lvl = 0; lvl < 4; ++lvl) {
    const std::string p = "level" + std::to_string(lvl) + "_";
    tr.Range(p + kPresetKeys[0], c.presets[lvl].pitch_shift_semitones);
    tr.Range(p + kPresetKeys[1], c.presets[lvl].time_stretch_rate);
    tr.Range(p + kPresetKeys[2], c.presets[lvl].tanh_distortion_amount);
  }
  tr.Check();

  SectionReader rb = section("rawboost");
  std::vector<std::string> algos;
  for (RawBoostAlgo a : c.rawboost.algos) algos.emplace_back(RawBoostAlgoName(a));
  rb.List("algos", algos);
  c.rawboost.algos.clear();
  for (const auto& a : algos) {
    try {
      c.rawboost.algos.push_back(ParseRawBoostAlgo(a));
    } catch (const Error& e) {
      throw rb.Fail("algos", e.what());
    }
  }
  rb.Int("n_bands", c.rawboost.n_bands);
  rb.Range("notch_hz", c.rawboost.notch_hz);
  rb.Range("notch_width_hz", c.rawboost.notch_width_hz);
  rb.Range("notch_gain_db", c.rawboost.notch_gain_db);
  rb.Range("n_coeffs", c.rawboost.n_coeffs);
  rb.Range("bias_db", c.rawboost.bias_db);
  rb.Int("nonlinear_order", c.rawboost.nonlinear_order);
  rb.Range("snr_db", c.rawboost.snr_db);
  rb.Double("impulse_percent", c.rawboost.impulse_percent);
  rb.Double("impulse_gain", c.rawboost.impulse_gain);
  rb.Check();

  SectionReader sy = section("synthesis");
  std::string mode(SynthesisModeName(c.synthesis.mode));
  sy.String("mode", mode);
  try {
    c.synthesis.mode = ParseSynthesisMode(mode);
  } catch (const Error& e) {
    throw sy.Fail("mode", e.what());
  }
  sy.Double("branch_ratio", c.synthesis.branch_ratio);
  sy.String("vc", c.synthesis.vc);
  sy.Int("knn_k", c.synthesis.knn_k);
  sy.Int("griffin_lim_iters", c.synthesis.griffin_lim_iters);
  sy.List("vocoders", c.synthesis.vocoders);
  sy.Int("workers", c.synthesis.workers);
  sy.Double("max_failure_ratio", c.synthesis.max_failure_ratio);
  sy.Check();

  SectionReader be = section("backends");
  if (be.tree()) {
    for (const auto& [key, child] : *be.tree()) {
      const bool is_vc = key.rfind("vc.", 0) == 0;
      const bool is_voc = key.rfind("vocoder.", 0) == 0;
      if (!is_vc && !is_voc) continue;
      const std::string name = key.substr(key.find('.') + 1);
      if (name.empty()) throw be.Fail(key, "backend name is empty");
      auto argv = SplitCommand(child.data());
      if (argv.empty()) throw be.Fail(key, "backend command is empty");
      (is_vc ? c.external_vc : c.external_vocoders)[name] = std::move(argv);
    }
  }
  be.Check({"vc.", "vocoder."});

  SectionReader de = section("detector");
  de.String("front_end", c.detector.front_end);
  de.Int("toy_hidden", c.detector.toy_hidden);
  de.Double("dropout", c.detector.dropout);
  de.Check();

  SectionReader tn = section("training");
  tn.Double("lr_front", c.training.lr_front);
  tn.Double("lr_head", c.training.lr_head);
  tn.Double("lr_loss", c.training.lr_loss);
  tn.Double("weight_decay", c.training.weight_decay);
  tn.Int("max_epochs", c.training.max_epochs);
  tn.Int("warmup_epochs", c.training.warmup_epochs);
  tn.Double("final_lr", c.training.final_lr);
  tn.Int("batch_size", c.training.batch_size);
  tn.Int("patience", c.training.patience);
  tn.Bool("freeze_front_end", c.training.freeze_front_end);
  tn.Int("workers", c.train_workers);
  tn.Check();

  SectionReader pa = section("paths");
  pa.String("run_dir", c.paths.run_dir);
  pa.String("real_manifest", c.paths.real_manifest);
  pa.String("train_manifest", c.paths.train_manifest);
  pa.String("dev_manifest", c.paths.dev_manifest);
  pa.List("eval_manifests", c.paths.eval_manifests);
  pa.Check();

  c.training.seed = c.seed;
  c.Validate();
  return c;
}

pt::ptree ReadTree(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  return tree;
}

}  // namespace

IntensityPreset ExperimentConfig::ActivePreset() const {
  IntensityPreset p = presets.at(static_cast<std::size_t>(level));
  p.rawboost = rawboost;
  return p;
}

void ExperimentConfig::Validate() const {
  if (level < 0 || level > 3) throw ConfigError("transforms.level must be 0, 1, 2 or 3");
  for (const auto& p : presets) {
    IntensityPreset q = p;
    q.rawboost = rawboost;
    q.Validate();
  }
  rawboost.Validate();
  if (!(synthesis.branch_ratio >= 0.0 && synthesis.branch_ratio <= 1.0))
    throw ConfigError("synthesis.branch_ratio must lie in [0, 1]");
  if (synthesis.knn_k < 1) throw ConfigError("synthesis.knn_k must be at least 1");
  if (synthesis.griffin_lim_iters < 1) throw ConfigError("synthesis.griffin_lim_iters must be at least 1");
  if (synthesis.workers < 1) throw ConfigError("synthesis.workers must be at least 1");
  if (!(synthesis.max_failure_ratio >= 0.0 && synthesis.max_failure_ratio <= 1.0))
    throw ConfigError("synthesis.max_failure_ratio must lie in [0, 1]");
  if (synthesis.vc != "knn" && synthesis.vc != "identity" && !external_vc.count(synthesis.vc))
    throw ConfigError("synthesis.vc: unknown backend '" + synthesis.vc + "' (builtin: knn, identity)");
  for (const auto& v : synthesis.vocoders)
    if (v != "griffin_lim" && !external_vocoders.count(v))
      throw ConfigError("synthesis.vocoders: unknown backend '" + v + "' (builtin: griffin_lim)");
  if (detector.front_end != "toy") throw ConfigError("detector.front_end: unknown front end '" + detector.front_end + "'");
  if (detector.toy_hidden < 1) throw ConfigError("detector.toy_hidden must be at least 1");
  if (!(detector.dropout >= 0.0 && detector.dropout < 1.0)) throw ConfigError("detector.dropout must lie in [0, 1)");
  if (train_workers < 1) throw ConfigError("training.workers must be at least 1");
  if (training.seed != seed) throw ConfigError("training seed must equal the root seed");
  training.Validate();
}

ExperimentConfig ParseConfig(const std::string& text, const std::string& origin) {
  return FromTree(ReadTree(text, origin), origin);
}

ExperimentConfig LoadConfig(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path.string());
}

std::string SerializeConfig(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n";
  o << "\n[transforms]\nlevel = " << c.level << "\n";
  for (int lvl = 0; lvl < 4; ++lvl) {
    const auto& p = c.presets[lvl];
    const std::string pre = "level" + std::to_string(lvl) + "_";
    o << pre << kPresetKeys[0] << " = " << FormatInterval(p.pitch_shift_semitones) << "\n";
    o << pre << kPresetKeys[1] << " = " << FormatInterval(p.time_stretch_rate) << "\n";
    o << pre << kPresetKeys[2] << " = " << FormatInterval(p.tanh_distortion_amount) << "\n";
  }
  const auto& rb = c.rawboost;
  std::vector<std::string> algos;
  for (RawBoostAlgo a : rb.algos) algos.emplace_back(RawBoostAlgoName(a));
  o << "\n[rawboost]\n"
    << "algos = " << Join(algos, ", ") << "\n"
    << "n_bands = " << rb.n_bands << "\n"
    << "notch_hz = " << FormatInterval(rb.notch_hz) << "\n"
    << "notch_width_hz = " << FormatInterval(rb.notch_width_hz) << "\n"
    << "notch_gain_db = " << FormatInterval(rb.notch_gain_db) << "\n"
    << "n_coeffs = " << FormatInterval(rb.n_coeffs) << "\n"
    << "bias_db = " << FormatInterval(rb.bias_db) << "\n"
    << "nonlinear_order = " << rb.nonlinear_order << "\n"
    << "snr_db = " << FormatInterval(rb.snr_db) << "\n"
    << "impulse_percent = " << FormatDouble(rb.impulse_percent) << "\n"
    << "impulse_gain = " << FormatDouble(rb.impulse_gain) << "\n";
  const auto& sy = c.synthesis;
  o << "\n[synthesis]\n"
    << "mode = " << SynthesisModeName(sy.mode) << "\n"
    << "branch_ratio = " << FormatDouble(sy.branch_ratio) << "\n"
    << "vc = " << sy.vc << "\n"
    << "knn_k = " << sy.knn_k << "\n"
    << "griffin_lim_iters = " << sy.griffin_lim_iters << "\n"
    << "vocoders = " << Join(sy.vocoders, ", ") << "\n"
    << "workers = " << sy.workers << "\n"
    << "max_failure_ratio = " << FormatDouble(sy.max_failure_ratio) << "\n";
  o << "\n[backends]\n";
  auto quote = [](const std::vector<std::string>& argv) {
    std::vector<std::string> parts;
    for (const auto& a : argv) parts.push_back(a.find_first_of(" \t") == std::string::npos ? a : "\"" + a + "\"");
    return Join(parts, " ");
  };
  for (const auto& [name, argv] : c.external_vc) o << "vc." << name << " = " << quote(argv) << "\n";
  for (const auto& [name, argv] : c.external_vocoders) o << "vocoder." << name << " = " << quote(argv) << "\n";
  o << "\n[detector]\n"
    << "front_end = " << c.detector.front_end << "\n"
    << "toy_hidden = " << c.detector.toy_hidden << "\n"
    << "dropout = " << FormatDouble(c.detector.dropout) << "\n";
  const auto& t = c.training;
  o << "\n[training]\n"
    << "lr_front = " << FormatDouble(t.lr_front) << "\n"
    << "lr_head = " << FormatDouble(t.lr_head) << "\n"
    << "lr_loss = " << FormatDouble(t.lr_loss) << "\n"
    << "weight_decay = " << FormatDouble(t.weight_decay) << "\n"
    << "max_epochs = " << t.max_epochs << "\n"
    << "warmup_epochs = " << t.warmup_epochs << "\n"
    << "final_lr = " << FormatDouble(t.final_lr) << "\n"
    << "batch_size = " << t.batch_size << "\n"
    << "patience = " << t.patience << "\n"
    << "freeze_front_end = " << (t.freeze_front_end ? "true" : "false") << "\n"
    << "workers = " << c.train_workers << "\n";
  o << "\n[paths]\n"
    << "run_dir = " << c.paths.run_dir << "\n"
    << "real_manifest = " << c.paths.real_manifest << "\n"
    << "train_manifest = " << c.paths.train_manifest << "\n"
    << "dev_manifest = " << c.paths.dev_manifest << "\n"
    << "eval_manifests = " << Join(c.paths.eval_manifests, ", ") << "\n";
  return o.str();
}

void ApplyOverride(ExperimentConfig& c, const std::string& assignment) { ApplyOverrides(c, {assignment}); }

void ApplyOverrides(ExperimentConfig& c, const std::vector<std::string>& assignments) {
  pt::ptree tree = ReadTree(SerializeConfig(c), "<override>");
  for (const auto& assignment : assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    const std::string lhs = Trim(assignment.substr(0, eq));
    const std::string value = Trim(assignment.substr(eq + 1));
    const auto dot = lhs.find('.');
    if (dot == std::string::npos) {
      if (tree.find(lhs) == tree.not_found()) throw ConfigError("override: unknown key '" + lhs + "'");
      tree.put(Key(lhs), value);
      continue;
    }
    const std::string section = lhs.substr(0, dot);
    const std::string key = lhs.substr(dot + 1);
    auto it = tree.find(section);
    if (it == tree.not_found()) throw ConfigError("override: unknown section '" + section + "'");
    if (section != "backends" && it->second.find(key) == it->second.not_found())
      throw ConfigError("override: unknown key '" + lhs + "'");
    it->second.put(Key(key), value);
  }
  c = FromTree(tree, "overrides");
}

std::string ConfigValue(const ExperimentConfig& c, const std::string& key) {
  const pt::ptree tree = ReadTree(SerializeConfig(c), "<config>");
  const auto dot = key.find('.');
  const pt::ptree* node = &tree;
  std::string leaf = key;
  if (dot != std::string::npos) {
    const auto it = tree.find(key.substr(0, dot));
    if (it == tree.not_found()) throw ConfigError("unknown config key '" + key + "'");
    node = &it->second;
    leaf = key.substr(dot + 1);
  }
  const auto it = node->find(leaf);
  if (it == node->not_found() || !it->second.empty()) throw ConfigError("unknown config key '" + key + "'");
  return Trim(it->second.data());
}

std::optional<fs::path> ResolveConfigPath(const std::optional<fs::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return fs::path(env);
  return std::nullopt;
}

std::vector<std::string> SplitCommand(const std::string& cmd) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, have = false;
  for (char ch : cmd) {
    if (ch == '"') {
      quoted = !quoted;
      have = true;
    } else if (!quoted && (ch == ' ' || ch == '\t')) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += ch;
      have = true;
    }
  }
  if (quoted) throw ConfigError("unbalanced quote in command '" + cmd + "'");
  if (have) out.push_back(cur);
  return out;
}

SynthesisBackends MakeBackends(const ExperimentConfig& c) {
  SynthesisBackends b;
  const auto& sy = c.synthesis;
  if (auto it = c.external_vc.find(sy.vc); it != c.external_vc.end())
    b.vc = std::make_shared<ExternalVcBackend>(it->first, it->second);
  else if (sy.vc == "knn")
    b.vc = std::make_shared<KnnVcBackend>(sy.knn_k, sy.griffin_lim_iters);
  else if (sy.vc == "identity")
    b.vc = std::make_shared<IdentityVcBackend>();
  else
    throw ConfigError("unknown vc backend '" + sy.vc + "'");
  for (const auto& v : sy.vocoders) {
    if (auto it = c.external_vocoders.find(v); it != c.external_vocoders.end())
      b.vocoders.push_back(std::make_shared<ExternalVocoderBackend>(it->first, it->second));
    else if (v == "griffin_lim")
      b.vocoders.push_back(std::make_shared<GriffinLimVocoder>(sy.griffin_lim_iters));
    else
      throw ConfigError("unknown vocoder backend '" + v + "'");
  }
  return b;
}

std::unique_ptr<FrontEnd> MakeConfiguredFrontEnd(const ExperimentConfig& c) {
  ToyFrontEndOptions toy;
  toy.hidden = c.detector.toy_hidden;
  return MakeFrontEnd(c.detector.front_end, toy);
}

}  // namespace afss
