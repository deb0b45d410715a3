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

#ifndef SLT_HARNESS_DECODE_RUNNER_H_
#define SLT_HARNESS_DECODE_RUNNER_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slt/decode/coupled.h"
#include "slt/harness/data.h"
#include "slt/harness/recipe.h"
#include "slt/model/models.h"

namespace slt {

struct ModelPaths {
  std::string ext_asr;
  std::string ext_mt;
  std::string joint;
};

struct ModelSet {
  std::optional<AsrModel<float>> ext_asr;
  std::optional<MtModel<float>> ext_mt;
  std::optional<JointModel<float>> joint;
};

// Loads every model the recipes name. Missing files are all reported in
// one Error before anything is loaded.
ModelSet LoadModelsFor(const std::vector<Recipe>& recipes, const ModelPaths& paths,
                       const ExperimentConfig& config, const Vocabularies& vocabs);

struct UtteranceTiming {
  std::string id;
  double asr_ms = 0;  // transcript search
  double mt_ms = 0;   // all translation searches
};

// Coupled search for one utterance: transcript n-best from the recipe's
// ASR ensemble, a translation n-best per transcript from its MT ensemble
// (Joint-MT reads the joint model's forced-continuation states for that
// transcript), then the best combined pair.
CoupledResult DecodeUtterance(const Recipe& recipe, const ModelSet& models,
                              const FeatureMatrix& features, const DecodingConfig& options,
                              UtteranceTiming* timing = nullptr);

struct DecodeSummary {
  Recipe recipe;
  std::vector<std::string> ids;
  std::vector<std::string> transcripts;   // ASR 1-best
  std::vector<std::string> translations;  // coupled best
  std::vector<std::string> pipeline;      // 1-best transcript -> its 1-best translation
  std::vector<double> coupled_scores;
  std::vector<double> pipeline_scores;
  std::vector<UtteranceTiming> timing;
  std::vector<std::string> files;
};

// Decodes every example and writes into `out_dir`:
//   transcript.1best, translation.1best, pipeline.1best   "id<TAB>text"
//   asr.nbest, coupled.nbest                              n-best records
//   timing.tsv                                            per utterance
DecodeSummary RunDecode(const Recipe& recipe, const ModelSet& models, const Vocabularies& vocabs,
                        const std::vector<Example>& examples, const DecodingConfig& options,
                        const std::string& out_dir);

// Ext-MT over reference transcripts (text translation); writes
// translation.1best and mt.nbest.
std::vector<std::string> RunTextTranslation(const MtModel<float>& model,
                                            const Vocabularies& vocabs,
                                            const std::vector<Example>& examples,
                                            const DecodingConfig& options,
                                            const std::string& out_dir);

// "id<TAB>text" files.
void WriteHypotheses(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& rows);
std::vector<std::pair<std::string, std::string>> ReadHypotheses(const std::string& path);

}  // namespace slt

#endif  // SLT_HARNESS_DECODE_RUNNER_H_
