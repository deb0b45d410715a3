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

#include "slt/model/config.h"

#include "slt/error.h"

namespace slt {

std::string ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kAsr: return "asr";
    case ModelKind::kMt: return "mt";
    case ModelKind::kJoint: return "joint";
  }
  return "?";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "asr") return ModelKind::kAsr;
  if (name == "mt") return ModelKind::kMt;
  if (name == "joint") return ModelKind::kJoint;
  throw Error("unknown model kind '" + name + "'");
}

void TransformerConfig::Validate(ModelKind kind) const {
  auto require = [](bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw Error("invalid transformer config: " + field + " " + why);
  };
  require(encoder_layers >= 1, "encoder_layers", "must be >= 1");
  require(decoder_layers >= 1, "decoder_layers", "must be >= 1");
  require(d_model >= 1, "d_model", "must be >= 1");
  require(d_ff >= 1, "d_ff", "must be >= 1");
  require(heads >= 1, "heads", "must be >= 1");
  require(d_model % heads == 0, "d_model", "must be divisible by heads");
  require(dropout >= 0 && dropout < 1, "dropout", "must be in [0, 1)");
  require(label_smoothing >= 0 && label_smoothing < 1, "label_smoothing", "must be in [0, 1)");
  require(input_dim >= 1, "input_dim", "must be >= 1");
  require(target_vocab > kNumSpecials, "target_vocab", "must exceed the special symbols");
  if (kind == ModelKind::kMt && mt_input == MtInputMode::kTokens) {
    require(input_dim > kNumSpecials, "input_dim", "(source vocabulary) must exceed the specials");
  }
}

TransformerConfig TransformerConfig::ReferenceAsr(int feature_dim, int vocab) {
  TransformerConfig c;
  c.encoder_layers = 12;
  c.decoder_layers = 6;
  c.d_model = 512;
  c.d_ff = 2048;
  c.heads = 8;
  c.input_dim = feature_dim;
  c.target_vocab = vocab;
  return c;
}

TransformerConfig TransformerConfig::ReferenceMt(int d_model, int source_vocab, int target_vocab) {
  TransformerConfig c;
  c.encoder_layers = 6;
  c.decoder_layers = 6;
  c.d_model = d_model;
  c.d_ff = 2048;
  c.heads = 8;
  c.input_dim = source_vocab;
  c.target_vocab = target_vocab;
  return c;
}

nlohmann::json ToJson(const TransformerConfig& c) {
  return {
      {"encoder_layers", c.encoder_layers},
      {"decoder_layers", c.decoder_layers},
      {"d_model", c.d_model},
      {"d_ff", c.d_ff},
      {"heads", c.heads},
      {"dropout", c.dropout},
      {"label_smoothing", c.label_smoothing},
      {"source_granularity", GranularityName(c.source_granularity)},
      {"target_granularity", GranularityName(c.target_granularity)},
      {"input_dim", c.input_dim},
      {"target_vocab", c.target_vocab},
      {"mt_input", c.mt_input == MtInputMode::kTokens ? "tokens" : "hidden"},
  };
}

TransformerConfig TransformerConfigFromJson(const nlohmann::json& j) {
  TransformerConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("encoder_layers", c.encoder_layers);
  get("decoder_layers", c.decoder_layers);
  get("d_model", c.d_model);
  get("d_ff", c.d_ff);
  get("heads", c.heads);
  get("dropout", c.dropout);
  get("label_smoothing", c.label_smoothing);
  get("input_dim", c.input_dim);
  get("target_vocab", c.target_vocab);
  if (j.contains("source_granularity"))
    c.source_granularity = ParseGranularity(j.at("source_granularity").get<std::string>());
  if (j.contains("target_granularity"))
    c.target_granularity = ParseGranularity(j.at("target_granularity").get<std::string>());
  if (j.contains("mt_input")) {
    const auto mode = j.at("mt_input").get<std::string>();
    if (mode != "tokens" && mode != "hidden") throw Error("unknown mt_input '" + mode + "'");
    c.mt_input = mode == "tokens" ? MtInputMode::kTokens : MtInputMode::kHidden;
  }
  return c;
}

std::string FirstConfigDifference(const TransformerConfig& a, const TransformerConfig& b) {
  const nlohmann::json ja = ToJson(a), jb = ToJson(b);
  for (const auto& [key, value] : ja.items()) {
    if (jb.at(key) != value) return key;
  }
  return "";
}

}  // namespace slt
