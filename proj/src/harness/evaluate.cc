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

#include "slt/harness/evaluate.h"

#include <set>

#include "slt/error.h"
#include "slt/harness/decode_runner.h"
#include "slt/harness/recipe.h"

namespace slt {
namespace {

// Talks in first-appearance order, each with its segments in file order.
std::vector<std::pair<std::string, std::vector<const ReferenceSegment*>>> ByTalk(
    const std::vector<ReferenceSegment>& references) {
  std::vector<std::pair<std::string, std::vector<const ReferenceSegment*>>> talks;
  std::map<std::string, std::size_t> index;
  for (const auto& r : references) {
    auto [it, inserted] = index.emplace(r.talk, talks.size());
    if (inserted) talks.push_back({r.talk, {}});
    talks[it->second].second.push_back(&r);
  }
  return talks;
}

// Hypothesis word lists per reference segment under the given mode.
std::vector<Words> Segmentation(const std::vector<const ReferenceSegment*>& talk,
                                const HypothesisMap& hyps, ScoringMode mode) {
  std::vector<Words> out;
  if (mode == ScoringMode::kSegmented) {
    for (const ReferenceSegment* r : talk) out.push_back(SplitOnSpace(hyps.at(r->segment)));
    return out;
  }
  Words stream;
  std::vector<Words> refs;
  for (const ReferenceSegment* r : talk) {
    const Words h = SplitOnSpace(hyps.at(r->segment));
    stream.insert(stream.end(), h.begin(), h.end());
    refs.push_back(SplitOnSpace(r->text));
  }
  return MwerSegment(stream, refs).segments;
}

}  // namespace

std::string ScoringModeName(ScoringMode mode) {
  return mode == ScoringMode::kSegmented ? "segmented" : "mwer-stream";
}

ScoringMode ParseScoringMode(const std::string& name) {
  if (name == "segmented") return ScoringMode::kSegmented;
  if (name == "mwer-stream") return ScoringMode::kMwerStream;
  throw Error("unknown scoring mode '" + name + "' (expected segmented or mwer-stream)");
}

HypothesisMap AlignHypotheses(const std::vector<ReferenceSegment>& references,
                              const std::vector<std::pair<std::string, std::string>>& hypotheses) {
  HypothesisMap map;
  for (const auto& [id, text] : hypotheses)
    if (!map.emplace(id, text).second) throw Error("duplicate hypothesis for utterance '" + id + "'");
  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const auto& r : references) {
    if (!seen.insert(r.segment).second)
      throw Error("duplicate reference segment '" + r.segment + "'");
    if (!map.count(r.segment)) missing.push_back(r.segment);
  }
  if (!missing.empty()) {
    std::string msg = "missing hypotheses for utterance ids:";
    for (const auto& id : missing) msg += " " + id;
    throw Error(msg);
  }
  return map;
}

BleuReport ScoreTranslations(const std::vector<ReferenceSegment>& references,
                             const HypothesisMap& hypotheses, ScoringMode mode) {
  std::vector<ScoredSegment> scored;
  for (const auto& [talk, segments] : ByTalk(references)) {
    const std::vector<Words> hyp = Segmentation(segments, hypotheses, mode);
    for (std::size_t i = 0; i < segments.size(); ++i)
      scored.push_back({talk, segments[i]->text, JoinWords(hyp[i])});
  }
  return CorpusBleu(scored);
}

WerScore ScoreTranscripts(const std::vector<ReferenceSegment>& references,
                          const HypothesisMap& hypotheses, ScoringMode mode) {
  WerScore score;
  for (const auto& [talk, segments] : ByTalk(references)) {
    const std::vector<Words> hyp = Segmentation(segments, hypotheses, mode);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const Words ref = SplitOnSpace(segments[i]->text);
      score.errors += EditDistance(ref, hyp[i]);
      score.reference_words += static_cast<int>(ref.size());
    }
  }
  return score;
}

nlohmann::json ToJson(const EvalRecord& r) {
  return {{"system", r.system}, {"split", r.split},    {"bleu", r.bleu},
          {"wer", r.wer},       {"talks", r.talk_bleu}};
}

EvalRecord EvalRecordFromJson(const nlohmann::json& j) {
  EvalRecord r;
  r.system = j.at("system").get<std::string>();
  r.split = j.at("split").get<std::string>();
  r.bleu = j.value("bleu", r.bleu);
  r.wer = j.value("wer", r.wer);
  r.talk_bleu = j.value("talks", r.talk_bleu);
  return r;
}

EvalRecord RunEval(const std::string& system, const std::string& split,
                   const std::string& translation_hypotheses,
                   const std::string& translation_references,
                   const std::string& transcript_hypotheses,
                   const std::string& transcript_references,
                   const std::vector<ScoringMode>& modes) {
  EvalRecord record;
  record.system = system;
  record.split = split;
  const auto refs = ReadReferences(translation_references);
  if (refs.empty()) throw Error("no references in " + translation_references);
  const HypothesisMap hyps = AlignHypotheses(refs, ReadHypotheses(translation_hypotheses));
  for (ScoringMode mode : modes) {
    const BleuReport report = ScoreTranslations(refs, hyps, mode);
    record.bleu[ScoringModeName(mode)] = report.average;
    if (mode == ScoringMode::kSegmented)
      for (const auto& t : report.talks) record.talk_bleu[t.talk] = t.score.bleu;
  }
  if (!transcript_hypotheses.empty()) {
    const auto trefs = ReadReferences(transcript_references);
    const HypothesisMap thyps = AlignHypotheses(trefs, ReadHypotheses(transcript_hypotheses));
    for (ScoringMode mode : modes)
      record.wer[ScoringModeName(mode)] = ScoreTranscripts(trefs, thyps, mode).percent();
  }
  return record;
}

namespace {

std::optional<double> Lookup(const EvalIndex& index, const std::string& system,
                             const std::string& split, bool bleu, const std::string& mode) {
  auto it = index.find({system, split});
  if (it == index.end()) return std::nullopt;
  const auto& values = bleu ? it->second.bleu : it->second.wer;
  auto v = values.find(mode);
  if (v == values.end()) return std::nullopt;
  return v->second;
}

std::string PairLabel(GranularityPair pair) {
  return pair == GranularityPair::kBpeBpe ? "BPE-BPE" : "CHAR-BPE";
}

}  // namespace

ReportTable AsrTable(const ExperimentConfig& config, const EvalIndex& index) {
  ReportTable t;
  t.title = "ASR systems (WER)";
  t.label_headers = {"ASR-system"};
  t.splits = config.report_splits;
  t.metrics = {"WER"};
  const bool bpe = config.granularity == GranularityPair::kBpeBpe;
  const std::string unit = bpe ? "BPE" : "Char";
  const std::pair<std::string, Recipe> rows[] = {
      {"Transformer-" + unit, Recipe{true, false, true, false}},
      {"Transformer-" + unit + " (joint)", Recipe{false, true, false, true}}};
  for (const auto& [label, recipe] : rows) {
    std::vector<std::optional<double>> values;
    for (const auto& split : config.report_splits)
      values.push_back(Lookup(index, recipe.Name(), split, false, config.slt_scoring));
    t.AddRow({label}, values, true);
  }
  return t;
}

ReportTable MtTable(const ExperimentConfig& config, const EvalIndex& index) {
  ReportTable t;
  t.title = "MT systems (BLEU, per-talk corpus average)";
  t.label_headers = {"Input-Output", "MT-system"};
  t.splits = config.report_splits;
  t.metrics = {"BLEU"};
  std::vector<std::optional<double>> values;
  for (const auto& split : config.report_splits)
    values.push_back(Lookup(index, kTextMtSystem, split, true, "segmented"));
  t.AddRow({PairLabel(config.granularity), "Ext-MT"}, values, true);
  return t;
}

ReportTable SltTable(const ExperimentConfig& config, const EvalIndex& index) {
  ReportTable t;
  t.title = "Joint SLT systems under ensemble combinations (" + config.slt_scoring + ")";
  t.label_headers = {PairLabel(config.granularity)};
  t.splits = config.report_splits;
  t.metrics = {"BLEU", "WER"};
  const auto recipes = Recipe::All();
  for (std::size_t i = 0; i < recipes.size(); ++i) {
    const Recipe& r = recipes[i];
    const bool wer_row = r.joint_mt && !r.ext_mt;
    std::vector<std::optional<double>> values;
    for (const auto& split : config.report_splits) {
      values.push_back(Lookup(index, r.Name(), split, true, config.slt_scoring));
      values.push_back(wer_row ? Lookup(index, r.Name(), split, false, config.slt_scoring)
                               : std::nullopt);
    }
    t.AddRow({r.Name()}, values, i % 3 == 0);
  }
  return t;
}

}  // namespace slt
