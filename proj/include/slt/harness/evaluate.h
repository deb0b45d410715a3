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

#ifndef SLT_HARNESS_EVALUATE_H_
#define SLT_HARNESS_EVALUATE_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "slt/eval/metrics.h"
#include "slt/eval/report.h"
#include "slt/harness/experiment.h"

namespace slt {

enum class ScoringMode { kSegmented, kMwerStream };
std::string ScoringModeName(ScoringMode mode);  // "segmented", "mwer-stream"
ScoringMode ParseScoringMode(const std::string& name);

using HypothesisMap = std::map<std::string, std::string>;

// Every reference segment needs a hypothesis; otherwise Error lists the
// missing ids. Extra hypotheses are ignored.
HypothesisMap AlignHypotheses(const std::vector<ReferenceSegment>& references,
                              const std::vector<std::pair<std::string, std::string>>& hypotheses);

// Segmented: each hypothesis scored against its own reference.
// MWER stream: a talk's hypotheses are concatenated in reference order and
// re-cut against that talk's references before scoring.
BleuReport ScoreTranslations(const std::vector<ReferenceSegment>& references,
                             const HypothesisMap& hypotheses, ScoringMode mode);

struct WerScore {
  int errors = 0;
  int reference_words = 0;
  // Word error rate in percent.
  double percent() const {
    return reference_words == 0 ? 0.0 : 100.0 * errors / reference_words;
  }
};
WerScore ScoreTranscripts(const std::vector<ReferenceSegment>& references,
                          const HypothesisMap& hypotheses, ScoringMode mode);

// Scores of one system on one split, stored as JSON:
//   {"system", "split", "bleu": {mode: value}, "wer": {mode: value},
//    "talks": {talk: bleu (segmented)}}
struct EvalRecord {
  std::string system;
  std::string split;
  std::map<std::string, double> bleu;  // by scoring mode name
  std::map<std::string, double> wer;
  std::map<std::string, double> talk_bleu;
};

nlohmann::json ToJson(const EvalRecord& record);
EvalRecord EvalRecordFromJson(const nlohmann::json& j);

// Scores translation (and, when given, transcript) hypothesis files against
// reference files in every requested mode.
EvalRecord RunEval(const std::string& system, const std::string& split,
                   const std::string& translation_hypotheses,
                   const std::string& translation_references,
                   const std::string& transcript_hypotheses,
                   const std::string& transcript_references,
                   const std::vector<ScoringMode>& modes);

// Result tables. Lookups are keyed by system name and split; absent
// entries print as blank cells.
using EvalIndex = std::map<std::pair<std::string, std::string>, EvalRecord>;

ReportTable AsrTable(const ExperimentConfig& config, const EvalIndex& index);
ReportTable MtTable(const ExperimentConfig& config, const EvalIndex& index);
// The nine ensemble systems in three groups of three; WER appears once per
// group, on the row whose MT side is Joint-MT.
ReportTable SltTable(const ExperimentConfig& config, const EvalIndex& index);

// System name used for text translation of reference transcripts.
inline constexpr const char* kTextMtSystem = "[Reference]=>[Ext-MT]";

}  // namespace slt

#endif  // SLT_HARNESS_EVALUATE_H_
