// Copyright 2026 The JointSLT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slt/harness/experiment.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "slt/error.h"
#include "slt/harness/manifest.h"
#include "slt/harness/recipe.h"

namespace slt {
namespace {

using nlohmann::json;

json ArchitectureJson(const TransformerConfig& c) {
  return {{"encoder_layers", c.encoder_layers}, {"decoder_layers", c.decoder_layers},
          {"d_model", c.d_model},               {"d_ff", c.d_ff},
          {"heads", c.heads},                   {"dropout", c.dropout},
          {"label_smoothing", c.label_smoothing}};
}

void RequireKnown(const json& j, const std::string& where, const std::set<std::string>& known) {
  if (!j.is_object()) throw Error("config section '" + where + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw Error("unknown config field '" + (where.empty() ? key : where + "." + key) + "'");
}

TransformerConfig ArchitectureFromJson(const json& j, const std::string& where) {
  RequireKnown(j, where, {"encoder_layers", "decoder_layers", "d_model", "d_ff", "heads",
                          "dropout", "label_smoothing"});
  TransformerConfig c;
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
  c.d_model = j.value("d_model", c.d_model);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.heads = j.value("heads", c.heads);
  c.dropout = j.value("dropout", c.dropout);
  c.label_smoothing = j.value("label_smoothing", c.label_smoothing);
  return c;
}

}  // namespace

std::string GranularityPairName(GranularityPair pair) {
  return pair == GranularityPair::kBpeBpe ? "bpe-bpe" : "char-bpe";
}

GranularityPair ParseGranularityPair(const std::string& name) {
  if (name == "bpe-bpe") return GranularityPair::kBpeBpe;
  if (name == "char-bpe") return GranularityPair::kCharBpe;
  throw Error("unknown granularity pair '" + name + "' (expected bpe-bpe or char-bpe)");
}

double PairLengthPenalty(GranularityPair pair) {
  return pair == GranularityPair::kBpeBpe ? 1.0 : 0.3;
}

void ExperimentConfig::Validate() const {
  if (transcript_vocab < kNumSpecials + 2) throw Error("transcript_vocab is too small");
  if (translation_vocab < kNumSpecials + 2) throw Error("translation_vocab is too small");
  if (num_mels < 4) throw Error("num_mels must be at least 4");
  for (const auto* c : {&asr, &mt}) {
    if (c->encoder_layers < 1 || c->decoder_layers < 1) throw Error("layer counts must be positive");
    if (c->heads < 1 || c->d_model % c->heads != 0)
      throw Error("d_model must be divisible by heads");
    if (c->d_ff < 1) throw Error("d_ff must be positive");
    if (c->dropout < 0 || c->dropout >= 1) throw Error("dropout must lie in [0, 1)");
    if (c->label_smoothing < 0 || c->label_smoothing >= 1)
      throw Error("label_smoothing must lie in [0, 1)");
  }
  if (!(lambda >= 0)) throw Error("lambda must be nonnegative");
  const TrainingSchedule& t = training;
  if (t.batch_size < 1) throw Error("training.batch_size must be positive");
  if (t.asr_steps < 0 || t.mt_steps < 0 || t.joint_steps < 0)
    throw Error("training step counts must be nonnegative");
  if (t.checkpoint_every < 1) throw Error("training.checkpoint_every must be positive");
  if (t.average_k < 1) throw Error("training.average_k must be positive");
  if (!(t.lr_scale > 0)) throw Error("training.lr_scale must be positive");
  if (t.warmup_steps < 1) throw Error("training.warmup_steps must be positive");
  if (t.clip_norm < 0) throw Error("training.clip_norm must be nonnegative");
  const DecodingConfig& d = decoding;
  if (d.asr_beam < 1 || d.mt_beam < 1) throw Error("beam widths must be positive");
  if (d.max_len < 1) throw Error("decoding.max_len must be positive");
  if (d.asr_alpha < 0) throw Error("decoding.asr_alpha must be nonnegative");
  if (std::abs(d.mt_alpha - PairLengthPenalty(granularity)) > 1e-12)
    throw Error("decoding.mt_alpha " + json(d.mt_alpha).dump() + " does not match granularity " +
                GranularityPairName(granularity) + " (expects " +
                json(PairLengthPenalty(granularity)).dump() + ")");
  for (const auto& r : d.recipes) Recipe::Parse(r);
  if (report_splits.empty()) throw Error("report_splits must name at least one split");
  if (slt_scoring != "segmented" && slt_scoring != "mwer-stream")
    throw Error("slt_scoring must be segmented or mwer-stream");
  task.Validate();
}

json ToJson(const ExperimentConfig& c) {
  const TrainingSchedule& t = c.training;
  const DecodingConfig& d = c.decoding;
  return {
      {"schema_version", ExperimentConfig::kSchemaVersion},
      {"seed", c.seed},
      {"granularity", GranularityPairName(c.granularity)},
      {"transcript_vocab", c.transcript_vocab},
      {"translation_vocab", c.translation_vocab},
      {"num_mels", c.num_mels},
      {"asr", ArchitectureJson(c.asr)},
      {"mt", ArchitectureJson(c.mt)},
      {"lambda", c.lambda},
      {"training",
       {{"batch_size", t.batch_size},
        {"asr_steps", t.asr_steps},
        {"mt_steps", t.mt_steps},
        {"joint_steps", t.joint_steps},
        {"checkpoint_every", t.checkpoint_every},
        {"average_k", t.average_k},
        {"shuffle", t.shuffle},
        {"lr_scale", t.lr_scale},
        {"warmup_steps", t.warmup_steps},
        {"clip_norm", t.clip_norm}}},
      {"decoding",
       {{"asr_beam", d.asr_beam},
        {"mt_beam", d.mt_beam},
        {"asr_alpha", d.asr_alpha},
        {"mt_alpha", d.mt_alpha},
        {"max_len", d.max_len},
        {"normalized_coupling", d.normalized_coupling},
        {"recipes", d.recipes}}},
      {"report_splits", c.report_splits},
      {"slt_scoring", c.slt_scoring},
      {"task", ToJson(c.task)},
      {"manifest", c.manifest},
  };
}

ExperimentConfig ExperimentConfigFromJson(const json& j) {
  RequireKnown(j, "",
               {"schema_version", "seed", "granularity", "transcript_vocab", "translation_vocab",
                "num_mels", "asr", "mt", "lambda", "training", "decoding", "report_splits",
                "slt_scoring", "task", "manifest"});
  if (!j.contains("schema_version")) throw Error("config is missing schema_version");
  if (j.at("schema_version") != ExperimentConfig::kSchemaVersion)
    throw Error("unsupported config schema_version " + j.at("schema_version").dump());
  ExperimentConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("granularity")) c.granularity = ParseGranularityPair(j.at("granularity"));
  c.transcript_vocab = j.value("transcript_vocab", c.transcript_vocab);
  c.translation_vocab = j.value("translation_vocab", c.translation_vocab);
  c.num_mels = j.value("num_mels", c.num_mels);
  if (j.contains("asr")) c.asr = ArchitectureFromJson(j.at("asr"), "asr");
  if (j.contains("mt")) c.mt = ArchitectureFromJson(j.at("mt"), "mt");
  c.lambda = j.value("lambda", c.lambda);
  if (j.contains("training")) {
    const json& t = j.at("training");
    RequireKnown(t, "training",
                 {"batch_size", "asr_steps", "mt_steps", "joint_steps", "checkpoint_every",
                  "average_k", "shuffle", "lr_scale", "warmup_steps", "clip_norm"});
    TrainingSchedule& s = c.training;
    s.batch_size = t.value("batch_size", s.batch_size);
    s.asr_steps = t.value("asr_steps", s.asr_steps);
    s.mt_steps = t.value("mt_steps", s.mt_steps);
    s.joint_steps = t.value("joint_steps", s.joint_steps);
    s.checkpoint_every = t.value("checkpoint_every", s.checkpoint_every);
    s.average_k = t.value("average_k", s.average_k);
    s.shuffle = t.value("shuffle", s.shuffle);
    s.lr_scale = t.value("lr_scale", s.lr_scale);
    s.warmup_steps = t.value("warmup_steps", s.warmup_steps);
    s.clip_norm = t.value("clip_norm", s.clip_norm);
  }
  // Without an explicit value the exponent follows the granularity pair.
  c.decoding.mt_alpha = PairLengthPenalty(c.granularity);
  if (j.contains("decoding")) {
    const json& d = j.at("decoding");
    RequireKnown(d, "decoding",
                 {"asr_beam", "mt_beam", "asr_alpha", "mt_alpha", "max_len",
                  "normalized_coupling", "recipes"});
    DecodingConfig& s = c.decoding;
    s.asr_beam = d.value("asr_beam", s.asr_beam);
    s.mt_beam = d.value("mt_beam", s.mt_beam);
    s.asr_alpha = d.value("asr_alpha", s.asr_alpha);
    s.mt_alpha = d.value("mt_alpha", s.mt_alpha);
    s.max_len = d.value("max_len", s.max_len);
    s.normalized_coupling = d.value("normalized_coupling", s.normalized_coupling);
    s.recipes = d.value("recipes", s.recipes);
  }
  c.report_splits = j.value("report_splits", c.report_splits);
  c.slt_scoring = j.value("slt_scoring", c.slt_scoring);
  if (j.contains("task")) c.task = SyntheticTaskSpecFromJson(j.at("task"));
  c.manifest = j.value("manifest", c.manifest);
  c.Validate();
  return c;
}

std::string CanonicalConfigText(const ExperimentConfig& config) {
  return ToJson(config).dump(2) + "\n";
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  json j;
  try {
    j = json::parse(ReadFileBytes(path));
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  ExperimentConfig c = ExperimentConfigFromJson(j);
  if (!c.manifest.empty()) {
    namespace fs = std::filesystem;
    fs::path m(c.manifest);
    if (m.is_relative()) m = fs::path(path).parent_path() / m;
    if (!fs::is_regular_file(m)) throw Error("config references missing manifest " + m.string());
    c.manifest = m.string();
  }
  return c;
}

void SaveExperimentConfig(const std::string& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config " + path);
  out << CanonicalConfigText(config);
}

void ApplyOverride(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("override '" + assignment + "' needs key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part))
      throw Error("unknown config field '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  *node = value;
}

}  // namespace slt
