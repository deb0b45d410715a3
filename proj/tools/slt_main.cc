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

// Command-line driver: every artifact lands under --run-dir, listed in
// <run-dir>/artifacts.json.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slt/decode/averaging.h"
#include "slt/error.h"
#include "slt/harness/run.h"

namespace fs = std::filesystem;
using namespace slt;

namespace {

struct CommonOptions {
  std::string run_dir;
  std::string config;
  std::vector<std::string> overrides;
  std::string seed;
};

void AddCommon(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--run-dir", o.run_dir, "Run directory")->required();
  cmd->add_option("--config", o.config, "Experiment config (default: <run-dir>/config.json)");
  cmd->add_option("--set", o.overrides, "Config override key.path=value (repeatable)");
  cmd->add_option("--seed", o.seed, "Shorthand for --set seed=N");
}

// Config from --config, else the run's saved config, else defaults; then
// overrides. The effective config is saved back into the run directory.
ExperimentConfig ResolveConfig(const CommonOptions& o) {
  ExperimentConfig base;
  const std::string saved = RunLayout{o.run_dir}.Config();
  if (!o.config.empty()) base = LoadExperimentConfig(o.config);
  else if (fs::is_regular_file(saved)) base = LoadExperimentConfig(saved);
  nlohmann::json doc = ToJson(base);
  for (const auto& s : o.overrides) ApplyOverride(doc, s);
  if (!o.seed.empty()) ApplyOverride(doc, "seed=" + o.seed);
  ExperimentConfig config = ExperimentConfigFromJson(doc);
  fs::create_directories(o.run_dir);
  SaveExperimentConfig(saved, config);
  RecordArtifacts(o.run_dir, "config", {saved});
  return config;
}

std::vector<std::string> SplitsOrAll(const std::string& split, const ExperimentConfig& config) {
  if (split.empty()) return config.report_splits;
  return {split};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint speech translation toolkit"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic task");
  AddCommon(gen, common);

  auto* vocab = app.add_subcommand("build-vocab", "Learn vocabularies and write reference files");
  AddCommon(vocab, common);

  auto* train = app.add_subcommand("train", "Train one model");
  AddCommon(train, common);
  std::string model_name = "ext-asr", objective_name;
  int steps = -1;
  train->add_option("--model", model_name, "ext-asr, ext-mt or joint")->required();
  train->add_option("--objective", objective_name, "asr, mt or joint (default per model)");
  train->add_option("--steps", steps, "Training steps (default from config)");

  auto* decode = app.add_subcommand("decode", "Decode a split with an ensemble recipe");
  AddCommon(decode, common);
  std::string recipe_name, decode_split;
  bool text_mt = false;
  decode->add_option("--recipe", recipe_name,
                     "Recipe such as '[Ext-ASR]=>[Joint-MT + Ext-MT]'; default: configured set");
  decode->add_option("--split", decode_split, "Split (default: report splits)");
  decode->add_flag("--text-mt", text_mt, "Translate reference transcripts with Ext-MT");

  auto* eval = app.add_subcommand("eval", "Score decoded hypotheses");
  AddCommon(eval, common);
  std::string eval_system, eval_split, eval_mode = "both";
  eval->add_option("--system", eval_system, "Recipe name (default: every decoded system)");
  eval->add_option("--split", eval_split, "Split (default: report splits)");
  eval->add_option("--mode", eval_mode, "segmented, mwer-stream or both");

  auto* average = app.add_subcommand("average-ckpt", "Average checkpoints");
  std::vector<std::string> inputs;
  std::string average_out;
  average->add_option("--inputs", inputs, "Checkpoint files")->required();
  average->add_option("--out", average_out, "Output checkpoint")->required();

  auto* report = app.add_subcommand("report", "Render result tables");
  AddCommon(report, common);

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  AddCommon(pipeline, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*average) {
      std::vector<Checkpoint> ckpts;
      for (const auto& path : inputs) ckpts.push_back(LoadCheckpoint(path));
      SaveCheckpoint(average_out, AverageCheckpoints(ckpts));
      std::cout << "averaged " << ckpts.size() << " checkpoints into " << average_out << "\n";
      return 0;
    }
    const ExperimentConfig config = ResolveConfig(common);
    const RunLayout run{common.run_dir};
    if (*gen) {
      const Manifest m = StageGenerateData(config, run);
      std::cout << "wrote " << m.records.size() << " utterances to " << run.DataDir() << "\n";
    } else if (*vocab) {
      const Vocabularies v = StageBuildVocab(config, run);
      std::cout << "transcript vocabulary " << v.transcript->vocab_size()
                << ", translation vocabulary " << v.translation->vocab_size() << "\n";
    } else if (*train) {
      const TrainModel model = ParseTrainModel(model_name);
      const Objective objective =
          objective_name.empty() ? DefaultObjective(model) : ParseObjective(objective_name);
      const TrainingResult r = StageTrain(config, run, model, objective, steps);
      for (const auto& e : r.log)
        std::cout << "step " << e.step << " dev l_total " << e.dev_total << " l_mt " << e.dev_mt
                  << " l_asr " << e.dev_asr << "\n";
      if (r.diverged) {
        std::cerr << "error: training diverged at " << r.diagnostic << "; last good checkpoint: "
                  << (r.last_good_checkpoint.empty() ? "none" : r.last_good_checkpoint) << "\n";
        return 3;
      }
      std::cout << "final model " << r.final_model << " (average of " << r.averaged.size()
                << " checkpoints)\n";
    } else if (*decode) {
      for (const auto& split : SplitsOrAll(decode_split, config)) {
        if (text_mt) {
          StageTextTranslate(config, run, split);
          continue;
        }
        const std::vector<Recipe> recipes = recipe_name.empty()
                                                ? ConfiguredRecipes(config)
                                                : std::vector<Recipe>{Recipe::Parse(recipe_name)};
        // Fail on any missing model before decoding starts.
        {
          const Vocabularies v = LoadVocabularies(run.VocabDir());
          LoadModelsFor(recipes, run.Models(), config, v);
        }
        for (const Recipe& r : recipes) {
          const DecodeSummary s = StageDecode(config, run, r, split);
          std::cout << split << " " << r.Name() << ": " << s.ids.size() << " utterances\n";
        }
      }
    } else if (*eval) {
      std::vector<ScoringMode> modes;
      if (eval_mode == "both") modes = {ScoringMode::kSegmented, ScoringMode::kMwerStream};
      else modes = {ParseScoringMode(eval_mode)};
      for (const auto& split : SplitsOrAll(eval_split, config)) {
        std::vector<std::string> systems;
        if (!eval_system.empty()) {
          systems.push_back(eval_system);
        } else {
          if (fs::exists(run.DecodeDir(split, "reference__ext-mt"))) systems.push_back(kTextMtSystem);
          for (const Recipe& r : Recipe::All())
            if (fs::exists(run.DecodeDir(split, r.Slug()))) systems.push_back(r.Name());
        }
        if (systems.empty()) throw Error("nothing decoded for split " + split);
        for (const auto& system : systems) {
          const EvalRecord e = StageEval(config, run, system, split, modes);
          std::cout << split << " " << system;
          for (const auto& [m, v] : e.bleu) std::cout << " BLEU[" << m << "]=" << v;
          for (const auto& [m, v] : e.wer) std::cout << " WER[" << m << "]=" << v;
          std::cout << "\n";
        }
      }
    } else if (*report) {
      std::cout << StageReport(config, run);
    } else if (*pipeline) {
      const PipelineSummary s =
          RunPipeline(config, run, [](const std::string& line) { std::cout << line << std::endl; });
      std::cout << s.report;
      std::cout << "cascade 1-best BLEU " << s.cascade_pipeline_bleu << ", joint coupled BLEU "
                << s.joint_coupled_bleu << ", total " << s.total_seconds << " s\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
