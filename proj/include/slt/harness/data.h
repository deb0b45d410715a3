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

#ifndef SLT_HARNESS_DATA_H_
#define SLT_HARNESS_DATA_H_

#include <memory>
#include <string>
#include <vector>

#include "slt/audio/features.h"
#include "slt/harness/experiment.h"
#include "slt/harness/manifest.h"
#include "slt/model/config.h"
#include "slt/text/subword.h"

namespace slt {

struct Vocabularies {
  std::shared_ptr<const SubwordModel> transcript;   // ASR targets, MT source tokens
  std::shared_ptr<const SubwordModel> translation;  // MT targets
};

// Learns both vocabularies from the train split.
Vocabularies BuildVocabularies(const ExperimentConfig& config, const Manifest& manifest);
// <dir>/transcript.vocab and <dir>/translation.vocab
void SaveVocabularies(const std::string& dir, const Vocabularies& vocabs);
Vocabularies LoadVocabularies(const std::string& dir);

struct Example {
  std::string id;
  std::string talk;
  FeatureMatrix features;
  std::vector<int> transcript;   // no bos/eos
  std::vector<int> translation;
  std::string transcript_text;   // normalized
  std::string translation_text;
};

// Reads audio and extracts normalized features for one split, in manifest
// order. An unknown split is an error.
std::vector<Example> LoadExamples(const Manifest& manifest, const std::string& split,
                                  const Vocabularies& vocabs, int num_mels);

// Model configurations with vocabulary sizes and input widths filled in.
struct ModelConfigs {
  TransformerConfig asr;
  TransformerConfig mt;  // token mode (Ext-MT); the joint model switches it
};
ModelConfigs ResolveModelConfigs(const ExperimentConfig& config, const Vocabularies& vocabs);

}  // namespace slt

#endif  // SLT_HARNESS_DATA_H_
