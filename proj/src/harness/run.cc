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

#include "slt/harness/run.h"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "slt/error.h"
#include "slt/eval/report.h"
#include "slt/harness/synthetic.h"

namespace slt {
namespace fs = std::filesystem;

namespace {

std::string Join(const std::string& a, const std::string& b) { return (fs::path(a) / b).string(); }

Manifest LoadManifest(const ExperimentConfig& config, const RunLayout& run) {
  const std::string path = run.Manifest(config);
  if (!fs::is_regular_file(path)) throw Error("no manifest at " + path + "; run gen-data first");
  Manifest m = ReadManifest(path);
  m.Validate();
  return m;
}

Vocabularies LoadVocab(const RunLayout& run) {
  if (!fs::is_regular_file(Join(run.VocabDir(), "transcript.vocab")))
    throw Error("no vocabularies in " + run.VocabDir() + "; run build-vocab first");
  return LoadVocabularies(run.VocabDir());
}

int DefaultSteps(const ExperimentConfig& config, TrainModel model) {
  switch (model) {
    case TrainModel::kExtAsr: return config.training.asr_steps;
    case TrainModel::kExtMt: return config.training.mt_steps;
    case TrainModel::kJoint: return config.training.joint_steps;
  }
  return 0;
}

std::string SystemSlug(const std::string& system) {
  if (system == kTextMtSystem) return "reference__ext-mt";
  return Recipe::Parse(system).Slug();
}

}  // namespace

std::string RunLayout::Config() const { return Join(root, "config.json"); }
std::string RunLayout::DataDir() const { return Join(root, "data"); }
std::string RunLayout::Manifest(const ExperimentConfig& config) const {
  return config.manifest.empty() ? Join(DataDir(), "manifest.tsv") : config.manifest;
}
std::string RunLayout::VocabDir() const { return Join(root, "vocab"); }
std::string RunLayout::References(const std::string& split, const std::string& stream) const {
  return Join(Join(root, "refs"), split + "." + stream + ".ref");
}
std::string RunLayout::CheckpointDir(TrainModel model) const {
  return Join(Join(root, "checkpoints"), TrainModelName(model));
}
std::string RunLayout::Model(TrainModel model) const {
  return Join(Join(root, "models"), TrainModelName(model) + ".ckpt");
}
ModelPaths RunLayout::Models() const {
  return {Model(TrainModel::kExtAsr), Model(TrainModel::kExtMt), Model(TrainModel::kJoint)};
}
std::string RunLayout::DecodeDir(const std::string& split, const std::string& slug) const {
  return Join(Join(Join(root, "decode"), split), slug);
}
std::string RunLayout::EvalFile(const std::string& split, const std::string& slug) const {
  return Join(Join(Join(root, "eval"), split), slug + ".json");
}
std::string RunLayout::ReportDir() const { return Join(root, "report"); }

std::vector<Recipe> ConfiguredRecipes(const ExperimentConfig& config) {
  if (config.decoding.recipes.empty()) return Recipe::All();
  std::vector<Recipe> out;
  for (const auto& name : config.decoding.recipes) out.push_back(Recipe::Parse(name));
  return out;
}

Manifest StageGenerateData(const ExperimentConfig& config, const RunLayout& run) {
  if (!config.manifest.empty()) {
    Manifest m = ReadManifest(config.manifest);
    m.Validate();
    return m;
  }
  Manifest m = GenerateSyntheticTask(config.task, run.DataDir());
  RecordArtifacts(run.root, "gen-data",
                  {Join(run.DataDir(), "manifest.tsv"), Join(run.DataDir(), "task.json"),
                   Join(run.DataDir(), "wav")});
  return m;
}

Vocabularies StageBuildVocab(const ExperimentConfig& config, const RunLayout& run) {
  const Manifest manifest = LoadManifest(config, run);
  Vocabularies v = BuildVocabularies(config, manifest);
  SaveVocabularies(run.VocabDir(), v);
  std::vector<std::string> written = {Join(run.VocabDir(), "transcript.vocab"),
                                      Join(run.VocabDir(), "translation.vocab")};
  std::map<std::string, std::pair<std::vector<ReferenceSegment>, std::vector<ReferenceSegment>>>
      refs;
  for (const auto& r : manifest.records) {
    refs[r.split].first.push_back({r.talk, r.id, NormalizeText(r.transcript)});
    refs[r.split].second.push_back({r.talk, r.id, NormalizeText(r.translation)});
  }
  fs::create_directories(Join(run.root, "refs"));
  for (const auto& [split, pair] : refs) {
    WriteReferences(run.References(split, "transcript"), pair.first);
    WriteReferences(run.References(split, "translation"), pair.second);
    written.push_back(run.References(split, "transcript"));
    written.push_back(run.References(split, "translation"));
  }
  RecordArtifacts(run.root, "build-vocab", written);
  return v;
}

TrainingResult StageTrain(const ExperimentConfig& config, const RunLayout& run, TrainModel model,
                          Objective objective, int steps) {
  const Vocabularies vocabs = LoadVocab(run);
  const Manifest manifest = LoadManifest(config, run);
  const auto train = LoadExamples(manifest, "train", vocabs, config.num_mels);
  const auto dev = LoadExamples(manifest, "dev", vocabs, config.num_mels);
  TrainingJob job;
  job.model = model;
  job.objective = objective;
  job.steps = steps < 0 ? DefaultSteps(config, model) : steps;
  job.checkpoint_dir = run.CheckpointDir(model);
  job.final_path = run.Model(model);
  // A fresh series: stale checkpoints from an earlier run would otherwise
  // take part in averaging.
  if (fs::exists(job.checkpoint_dir))
    for (const auto& entry : fs::directory_iterator(job.checkpoint_dir))
      if (entry.path().extension() == ".ckpt") fs::remove(entry.path());
  TrainingResult result = RunTraining(config, vocabs, train, dev, job);
  std::vector<std::string> written = result.checkpoints;
  written.push_back(Join(job.checkpoint_dir, "loss_log.tsv"));
  if (!result.final_model.empty()) written.push_back(result.final_model);
  RecordArtifacts(run.root, "train", written);
  return result;
}

DecodeSummary StageDecode(const ExperimentConfig& config, const RunLayout& run,
                          const Recipe& recipe, const std::string& split) {
  const Vocabularies vocabs = LoadVocab(run);
  const ModelSet models = LoadModelsFor({recipe}, run.Models(), config, vocabs);
  const Manifest manifest = LoadManifest(config, run);
  const auto examples = LoadExamples(manifest, split, vocabs, config.num_mels);
  DecodeSummary s = RunDecode(recipe, models, vocabs, examples, config.decoding,
                              run.DecodeDir(split, recipe.Slug()));
  RecordArtifacts(run.root, "decode", s.files);
  return s;
}

void StageTextTranslate(const ExperimentConfig& config, const RunLayout& run,
                        const std::string& split) {
  const Vocabularies vocabs = LoadVocab(run);
  const std::string path = run.Model(TrainModel::kExtMt);
  if (!fs::is_regular_file(path)) throw Error("text translation needs the Ext-MT model " + path);
  const MtModel<float> mt = LoadMtModel(path, config, vocabs);
  const Manifest manifest = LoadManifest(config, run);
  const auto examples = LoadExamples(manifest, split, vocabs, config.num_mels);
  RecordArtifacts(run.root, "decode",
                  RunTextTranslation(mt, vocabs, examples, config.decoding,
                                     run.DecodeDir(split, SystemSlug(kTextMtSystem))));
}

EvalRecord StageEval(const ExperimentConfig& config, const RunLayout& run,
                     const std::string& system, const std::string& split,
                     const std::vector<ScoringMode>& modes) {
  (void)config;
  const std::string slug = SystemSlug(system);
  const std::string dir = run.DecodeDir(split, slug);
  const std::string name = system == kTextMtSystem ? system : Recipe::Parse(system).Name();
  const bool has_transcripts = system != kTextMtSystem;
  const std::string hyp = Join(dir, "translation.1best");
  if (!fs::is_regular_file(hyp)) throw Error("no hypotheses for " + name + " on " + split + " at " + hyp);
  EvalRecord record = RunEval(
      name, split, hyp, run.References(split, "translation"),
      has_transcripts ? Join(dir, "transcript.1best") : "",
      has_transcripts ? run.References(split, "transcript") : "", modes);
  if (has_transcripts) {
    // The plain cascade choice: 1-best transcript, then its 1-best translation.
    const EvalRecord chain = RunEval(name, split, Join(dir, "pipeline.1best"),
                                     run.References(split, "translation"), "", "", modes);
    for (const auto& [mode, v] : chain.bleu) record.bleu["1best-chain/" + mode] = v;
  }
  const std::string out_path = run.EvalFile(split, slug);
  fs::create_directories(fs::path(out_path).parent_path());
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write " + out_path);
  out << ToJson(record).dump(2) << '\n';
  out.close();
  RecordArtifacts(run.root, "eval", {out_path});
  return record;
}

std::string StageReport(const ExperimentConfig& config, const RunLayout& run) {
  EvalIndex index;
  const fs::path eval_root = fs::path(run.root) / "eval";
  if (fs::exists(eval_root))
    for (const auto& entry : fs::recursive_directory_iterator(eval_root))
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        EvalRecord r = EvalRecordFromJson(nlohmann::json::parse(ReadFileBytes(entry.path().string())));
        index[{r.system, r.split}] = r;
      }
  if (index.empty()) throw Error("no evaluation results under " + eval_root.string());
  const ReportTable tables[] = {AsrTable(config, index), MtTable(config, index),
                                SltTable(config, index)};
  std::string text;
  nlohmann::json records = nlohmann::json::array();
  for (const auto& t : tables) {
    text += RenderTable(t) + "\n";
    for (auto& r : TableRecords(t)) records.push_back(r);
  }
  fs::create_directories(run.ReportDir());
  const std::string text_path = Join(run.ReportDir(), "tables.txt");
  const std::string json_path = Join(run.ReportDir(), "tables.json");
  std::ofstream(text_path) << text;
  std::ofstream(json_path) << records.dump(2) << '\n';
  RecordArtifacts(run.root, "report", {text_path, json_path});
  return text;
}

PipelineSummary RunPipeline(const ExperimentConfig& config, const RunLayout& run,
                            const std::function<void(const std::string&)>& log) {
  using Clock = std::chrono::steady_clock;
  PipelineSummary summary;
  const auto start = Clock::now();
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    const auto t0 = Clock::now();
    body();
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    summary.stage_seconds[name] += s;
    if (log) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.1f s", s);
      log(name + ": " + buf);
    }
  };
  fs::create_directories(run.root);
  SaveExperimentConfig(run.Config(), config);
  RecordArtifacts(run.root, "pipeline", {run.Config()});
  stage("gen-data", [&] { StageGenerateData(config, run); });
  stage("build-vocab", [&] { StageBuildVocab(config, run); });
  for (TrainModel m : {TrainModel::kExtAsr, TrainModel::kExtMt, TrainModel::kJoint}) {
    stage("train " + TrainModelName(m), [&] {
      const TrainingResult r = StageTrain(config, run, m, DefaultObjective(m), -1);
      if (r.diverged) throw Error("training " + TrainModelName(m) + " diverged: " + r.diagnostic);
    });
  }
  const std::vector<ScoringMode> modes = {ScoringMode::kSegmented, ScoringMode::kMwerStream};
  for (const auto& split : config.report_splits) {
    stage("text-mt " + split, [&] {
      StageTextTranslate(config, run, split);
      StageEval(config, run, kTextMtSystem, split, modes);
    });
    for (const Recipe& r : ConfiguredRecipes(config)) {
      stage("decode " + split + " " + r.Name(), [&] {
        DecodeSummary d = StageDecode(config, run, r, split);
        EvalRecord e = StageEval(config, run, r.Name(), split, modes);
        if (split == "test") {
          summary.decodes[r.Name()] = std::move(d);
          summary.evals[r.Name()] = std::move(e);
        }
      });
    }
  }
  stage("report", [&] { summary.report = StageReport(config, run); });
  summary.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  const std::string cascade = Recipe{true, false, true, false}.Name();
  const std::string joint = Recipe{false, true, false, true}.Name();
  if (summary.evals.count(cascade))
    summary.cascade_pipeline_bleu = summary.evals[cascade].bleu.at("1best-chain/segmented");
  if (summary.evals.count(joint))
    summary.joint_coupled_bleu = summary.evals[joint].bleu.at("segmented");
  return summary;
}

}  // namespace slt
