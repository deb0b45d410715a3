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

#ifndef SLT_HARNESS_EXPERIMENT_H_
#define SLT_HARNESS_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "slt/harness/synthetic.h"
#include "slt/model/config.h"

namespace slt {

// MT input-output granularity. The transcript vocabulary (ASR targets and
// MT source tokens) follows the input side; translations are always BPE.
enum class GranularityPair { kBpeBpe, kCharBpe };

std::string GranularityPairName(GranularityPair pair);  // "bpe-bpe", "char-bpe"
GranularityPair ParseGranularityPair(const std::string& name);
// Length-penalty exponent tied to each pair: 1 for BPE-BPE, 0.3 for CHAR-BPE.
double PairLengthPenalty(GranularityPair pair);

struct TrainingSchedule {
  int batch_size = 16;
  int asr_steps = 1000;
  int mt_steps = 800;
  int joint_steps = 1200;
  int checkpoint_every = 50;
  int average_k = 3;
  bool shuffle = true;
  double lr_scale = 0.25;
  int warmup_steps = 100;
  double clip_norm = 5.0;
  bool operator==(const TrainingSchedule&) const = default;
};

struct DecodingConfig {
  int asr_beam = 5;
  int mt_beam = 4;
  double asr_alpha = 0.0;
  double mt_alpha = 1.0;  // must equal PairLengthPenalty(granularity)
  int max_len = 40;
  bool normalized_coupling = false;
  std::vector<std::string> recipes;  // empty = all nine
  bool operator==(const DecodingConfig&) const = default;
};

// Attention alignment in the small ASR model forms much later with dropout,
// so the desk default turns it off for the speech side.
inline TransformerConfig NoDropout() {
  TransformerConfig c;
  c.dropout = 0.0;
  return c;
}

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  std::uint64_t seed = 1;
  GranularityPair granularity = GranularityPair::kBpeBpe;
  int transcript_vocab = 64;   // BPE target size (ignored for characters)
  int translation_vocab = 64;
  int num_mels = 80;           // features are 3 * num_mels wide

  // Architecture fields only; vocabulary sizes and input widths are filled
  // in from the built vocabularies.
  TransformerConfig asr = NoDropout();
  TransformerConfig mt;
  double lambda = 0.5;

  TrainingSchedule training;
  DecodingConfig decoding;

  std::vector<std::string> report_splits = {"dev", "test"};
  std::string slt_scoring = "mwer-stream";  // BLEU mode in the SLT tables

  SyntheticTaskSpec task;
  // An existing manifest to use instead of generating the synthetic task.
  std::string manifest;

  // Throws Error naming the offending field.
  void Validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json ToJson(const ExperimentConfig& config);
// Missing fields take defaults; unknown fields and a wrong schema version
// are errors. Validates the result.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);

// Canonical text: two-space indented JSON with sorted keys.
std::string CanonicalConfigText(const ExperimentConfig& config);

// Parses and validates; a referenced manifest must exist.
ExperimentConfig LoadExperimentConfig(const std::string& path);
void SaveExperimentConfig(const std::string& path, const ExperimentConfig& config);

// "a.b.c=value": value is parsed as JSON when possible, else taken as a
// string. The path must already exist in the document.
void ApplyOverride(nlohmann::json& doc, const std::string& assignment);

}  // namespace slt

#endif  // SLT_HARNESS_EXPERIMENT_H_
