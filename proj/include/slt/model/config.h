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

#ifndef SLT_MODEL_CONFIG_H_
#define SLT_MODEL_CONFIG_H_

#include <string>

#include "json.hpp"
#include "slt/text/subword.h"

namespace slt {

enum class ModelKind { kAsr, kMt, kJoint };
enum class MtInputMode { kTokens, kHidden };

std::string ModelKindName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

struct TransformerConfig {
  int encoder_layers = 2;
  int decoder_layers = 2;
  int d_model = 64;
  int d_ff = 256;
  int heads = 4;
  double dropout = 0.1;
  double label_smoothing = 0.1;
  Granularity source_granularity = Granularity::kBpe;
  Granularity target_granularity = Granularity::kBpe;
  // ASR: acoustic feature width. MT: source vocabulary size (token mode) or
  // bridge width (hidden mode).
  int input_dim = 240;
  int target_vocab = 32;
  MtInputMode mt_input = MtInputMode::kTokens;

  // Throws Error naming the offending field.
  void Validate(ModelKind kind) const;

  // The reference configurations: ASR 12/6 layers, 512/2048, 8 heads;
  // MT 6/6 layers, d_ff 2048, d_model 256 or 512.
  static TransformerConfig ReferenceAsr(int feature_dim, int vocab);
  static TransformerConfig ReferenceMt(int d_model, int source_vocab, int target_vocab);

  bool operator==(const TransformerConfig&) const = default;
};

nlohmann::json ToJson(const TransformerConfig& config);
TransformerConfig TransformerConfigFromJson(const nlohmann::json& j);

// Names the first field where two configs differ, or "" if equal.
std::string FirstConfigDifference(const TransformerConfig& a,
                                  const TransformerConfig& b);

}  // namespace slt

#endif  // SLT_MODEL_CONFIG_H_
