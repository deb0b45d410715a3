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

#ifndef SLT_HARNESS_RUN_H_
#define SLT_HARNESS_RUN_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "slt/harness/data.h"
#include "slt/harness/decode_runner.h"
#include "slt/harness/evaluate.h"
#include "slt/harness/experiment.h"
#include "slt/harness/training.h"

namespace slt {

// Where each stage reads and writes inside a run directory.
struct RunLayout {
  std::string root;

  std::string Config() const;                         // config.json
  std::string DataDir() const;                        // data/
  std::string Manifest(const ExperimentConfig& config) const;
  std::string VocabDir() const;                       // vocab/
  std::string References(const std::string& split, const std::string& stream) const;
  std::string CheckpointDir(TrainModel model) const;  // checkpoints/<model>/
  std::string Model(TrainModel model) const;          // models/<model>.ckpt
  ModelPaths Models() const;
  std::string DecodeDir(const std::string& split, const std::string& system_slug) const;
  std::string EvalFile(const std::string& split, const std::string& system_slug) const;
  std::string ReportDir() const;
};

// Each stage records what it wrote in <run>/artifacts.json.
Manifest StageGenerateData(const ExperimentConfig& config, const RunLayout& run);
// Also writes reference files "<split>.transcript.ref" and
// "<split>.translation.ref" for every split in the manifest.
Vocabularies StageBuildVocab(const ExperimentConfig& config, const RunLayout& run);
TrainingResult StageTrain(const ExperimentConfig& config, const RunLayout& run, TrainModel model,
                          Objective objective, int steps);
DecodeSummary StageDecode(const ExperimentConfig& config, const RunLayout& run,
                          const Recipe& recipe, const std::string& split);
void StageTextTranslate(const ExperimentConfig& config, const RunLayout& run,
                        const std::string& split);
// system: a recipe name or kTextMtSystem.
EvalRecord StageEval(const ExperimentConfig& config, const RunLayout& run,
                     const std::string& system, const std::string& split,
                     const std::vector<ScoringMode>& modes);
// Renders the ASR, MT and SLT tables from every eval file present;
// returns the text.
std::string StageReport(const ExperimentConfig& config, const RunLayout& run);

// The recipes a config asks for (all nine when none are listed).
std::vector<Recipe> ConfiguredRecipes(const ExperimentConfig& config);

struct PipelineSummary {
  std::map<std::string, double> stage_seconds;
  double total_seconds = 0;
  std::map<std::string, DecodeSummary> decodes;  // test split, by recipe name
  std::map<std::string, EvalRecord> evals;       // test split, by system name
  double cascade_pipeline_bleu = 0;  // [Ext-ASR]=>[Ext-MT], 1-best chain
  double joint_coupled_bleu = 0;     // [Joint-ASR]=>[Joint-MT], coupled
  std::string report;
};

// gen-data, build-vocab, train (ext-asr, ext-mt, joint), text MT, decode
// every configured recipe on every report split, eval, report. `log`
// receives one line per finished stage when set.
PipelineSummary RunPipeline(const ExperimentConfig& config, const RunLayout& run,
                            const std::function<void(const std::string&)>& log = {});

}  // namespace slt

#endif  // SLT_HARNESS_RUN_H_
