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

#ifndef SLT_HARNESS_TRAINING_H_
#define SLT_HARNESS_TRAINING_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "slt/harness/data.h"
#include "slt/model/checkpoint.h"
#include "slt/model/models.h"

namespace slt {

// Which network is trained.
enum class TrainModel { kExtAsr, kExtMt, kJoint };
// Which loss drives it. Ext-ASR takes only asr, Ext-MT only mt; the joint
// model accepts all three (asr = L_ASR alone, mt = L_MT alone,
// joint = L_MT + lambda * L_ASR).
enum class Objective { kAsr, kMt, kJoint };

std::string TrainModelName(TrainModel model);  // "ext-asr", "ext-mt", "joint"
TrainModel ParseTrainModel(const std::string& name);
std::string ObjectiveName(Objective objective);
Objective ParseObjective(const std::string& name);
Objective DefaultObjective(TrainModel model);

struct TrainingJob {
  TrainModel model = TrainModel::kExtAsr;
  Objective objective = Objective::kAsr;
  int steps = 0;
  std::string checkpoint_dir;  // step-NNNNNN.ckpt files and loss_log.tsv
  std::string final_path;      // averaged model
};

// One row per logging interval. Train values are means over the interval's
// steps; dev values come from a full pass over the dev set without dropout.
// Row 0 is the untrained model (no train values, no checkpoint).
struct LossLogEntry {
  std::int64_t step = 0;
  double learning_rate = 0;
  double train_total = std::numeric_limits<double>::quiet_NaN();
  double train_mt = std::numeric_limits<double>::quiet_NaN();
  double train_asr = std::numeric_limits<double>::quiet_NaN();
  double dev_total = 0;
  double dev_mt = 0;
  double dev_asr = 0;
  std::string checkpoint;
};

struct TrainingResult {
  std::vector<std::string> checkpoints;
  std::vector<LossLogEntry> log;
  std::string final_model;      // empty if training diverged
  std::vector<std::string> averaged;  // checkpoints that went into the final model
  bool diverged = false;
  std::string last_good_checkpoint;
  std::string diagnostic;
};

// Trains from a seeded initialization. A checkpoint is written every
// `checkpoint_every` steps with its dev loss; at the end the `average_k`
// checkpoints with the lowest dev loss are averaged into `final_path`.
// A non-finite loss or gradient stops training: earlier checkpoints stay
// on disk, no final model is written and the result says why.
TrainingResult RunTraining(const ExperimentConfig& config, const Vocabularies& vocabs,
                           const std::vector<Example>& train, const std::vector<Example>& dev,
                           const TrainingJob& job);

void WriteLossLog(const std::string& path, const std::vector<LossLogEntry>& log);

// Metadata a checkpoint of `model` must carry under this config.
CheckpointMeta ExpectedMeta(TrainModel model, const ExperimentConfig& config,
                            const Vocabularies& vocabs);

// Loaders verify kind, configs and vocabulary hashes against the config.
AsrModel<float> LoadAsrModel(const std::string& path, const ExperimentConfig& config,
                             const Vocabularies& vocabs);
MtModel<float> LoadMtModel(const std::string& path, const ExperimentConfig& config,
                           const Vocabularies& vocabs);
JointModel<float> LoadJointModel(const std::string& path, const ExperimentConfig& config,
                                 const Vocabularies& vocabs);

// Mean per-token losses over a set of examples (no dropout).
LossReport EvaluateLoss(const JointModel<float>& model, const std::vector<Example>& examples,
                        int batch_size);

}  // namespace slt

#endif  // SLT_HARNESS_TRAINING_H_
