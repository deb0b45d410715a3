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

#include "slt/harness/decode_runner.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>

#include "slt/decode/averaging.h"
#include "slt/decode/model_scorers.h"
#include "slt/error.h"
#include "slt/harness/training.h"

namespace slt {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double Millis(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

BeamOptions Options(int beam, double alpha, int max_len) {
  BeamOptions o;
  o.beam = beam;
  o.alpha = alpha;
  o.max_len = max_len;
  return o;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

}  // namespace

ModelSet LoadModelsFor(const std::vector<Recipe>& recipes, const ModelPaths& paths,
                       const ExperimentConfig& config, const Vocabularies& vocabs) {
  bool ext_asr = false, ext_mt = false, joint = false;
  for (const Recipe& r : recipes) {
    ext_asr |= r.needs_ext_asr();
    ext_mt |= r.needs_ext_mt();
    joint |= r.needs_joint();
  }
  std::vector<std::string> missing;
  auto check = [&](bool needed, const std::string& path, const char* what) {
    if (needed && (path.empty() || !fs::is_regular_file(path)))
      missing.push_back(std::string(what) + " (" + (path.empty() ? "no path" : path) + ")");
  };
  check(ext_asr, paths.ext_asr, "Ext-ASR");
  check(ext_mt, paths.ext_mt, "Ext-MT");
  check(joint, paths.joint, "joint model");
  if (!missing.empty()) {
    std::string msg = "recipe needs missing models:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
  }
  ModelSet set;
  if (ext_asr) set.ext_asr.emplace(LoadAsrModel(paths.ext_asr, config, vocabs));
  if (ext_mt) set.ext_mt.emplace(LoadMtModel(paths.ext_mt, config, vocabs));
  if (joint) set.joint.emplace(LoadJointModel(paths.joint, config, vocabs));
  return set;
}

CoupledResult DecodeUtterance(const Recipe& recipe, const ModelSet& models,
                              const FeatureMatrix& features, const DecodingConfig& options,
                              UtteranceTiming* timing) {
  if ((recipe.ext_asr && !models.ext_asr) || (recipe.ext_mt && !models.ext_mt) ||
      (recipe.needs_joint() && !models.joint))
    throw Error("recipe " + recipe.Name() + " needs a model that is not loaded");
  auto asr_search = [&] {
    std::vector<std::unique_ptr<StepScorer>> owned;
    if (recipe.ext_asr)
      owned.push_back(std::make_unique<DecoderScorer<float>>(AsrScorer(*models.ext_asr, features)));
    if (recipe.joint_asr)
      owned.push_back(
          std::make_unique<DecoderScorer<float>>(AsrScorer(models.joint->asr(), features)));
    EnsembleSpec spec;
    for (auto& s : owned) spec.members.push_back(s.get());
    const auto t0 = Clock::now();
    NBestList list = BeamSearch(spec, Options(options.asr_beam, options.asr_alpha, options.max_len));
    if (timing) timing->asr_ms += Millis(t0, Clock::now());
    return list;
  };
  auto mt_search = [&](const Hypothesis& z) {
    const auto t0 = Clock::now();
    const std::vector<int> transcript = z.Content();
    std::vector<std::unique_ptr<StepScorer>> owned;
    // Member order follows the recipe name: Joint-MT first.
    if (recipe.joint_mt) {
      const Tensor<float> bridge = models.joint->ForcedContinuation(features, transcript);
      owned.push_back(std::make_unique<DecoderScorer<float>>(
          MtScorer(models.joint->mt(), BridgeSource(bridge))));
    }
    if (recipe.ext_mt)
      owned.push_back(std::make_unique<DecoderScorer<float>>(
          MtScorer(*models.ext_mt, MtSource<float>::FromTokens({transcript}))));
    EnsembleSpec spec;
    for (auto& s : owned) spec.members.push_back(s.get());
    NBestList list = BeamSearch(spec, Options(options.mt_beam, options.mt_alpha, options.max_len));
    if (timing) timing->mt_ms += Millis(t0, Clock::now());
    return list;
  };
  CoupledOptions coupled;
  coupled.normalized = options.normalized_coupling;
  return CoupledDecode(asr_search, mt_search, coupled);
}

void WriteHypotheses(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out = OpenOut(path);
  for (const auto& [id, text] : rows) {
    if (id.find_first_of("\t\n") != std::string::npos ||
        text.find_first_of("\t\n") != std::string::npos)
      throw Error("hypothesis fields may not contain tabs or newlines");
    out << id << '\t' << text << '\n';
  }
}

std::vector<std::pair<std::string, std::string>> ReadHypotheses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read hypotheses " + path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path + ":" + std::to_string(number) + ": expected id<TAB>text");
    rows.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return rows;
}

DecodeSummary RunDecode(const Recipe& recipe, const ModelSet& models, const Vocabularies& vocabs,
                        const std::vector<Example>& examples, const DecodingConfig& options,
                        const std::string& out_dir) {
  fs::create_directories(out_dir);
  DecodeSummary s;
  s.recipe = recipe;
  const fs::path dir(out_dir);
  std::ofstream asr_nbest = OpenOut((dir / "asr.nbest").string());
  std::ofstream coupled_nbest = OpenOut((dir / "coupled.nbest").string());
  std::ofstream timing = OpenOut((dir / "timing.tsv").string());
  timing << "id\tasr_ms\tmt_ms\ttotal_ms\tbest_z\tbest_y\tcoupled_score\tpipeline_score\n";
  std::vector<std::pair<std::string, std::string>> transcripts, translations, pipeline;

  for (const Example& e : examples) {
    UtteranceTiming ut{e.id};
    const auto t0 = Clock::now();
    CoupledResult r = DecodeUtterance(recipe, models, e.features, options, &ut);
    const double total_ms = Millis(t0, Clock::now());

    const Hypothesis& z1 = r.asr.at(0);
    const Hypothesis& y11 = r.mt.at(0).at(0);
    const std::string z_text = vocabs.transcript->Decode(z1.Content());
    const std::string y_text = vocabs.translation->Decode(r.translation().Content());
    const std::string p_text = vocabs.translation->Decode(y11.Content());
    s.ids.push_back(e.id);
    s.transcripts.push_back(z_text);
    s.translations.push_back(y_text);
    s.pipeline.push_back(p_text);
    s.coupled_scores.push_back(r.best_score);
    s.pipeline_scores.push_back(r.scores.at(0).at(0));
    transcripts.push_back({e.id, z_text});
    translations.push_back({e.id, y_text});
    pipeline.push_back({e.id, p_text});

    for (std::size_t k = 0; k < r.asr.size(); ++k)
      WriteNBestRecord(asr_nbest, {e.id, static_cast<int>(k) + 1, r.asr[k].log_likelihood,
                                   r.asr[k].normalized,
                                   vocabs.transcript->Decode(r.asr[k].Content())});
    struct Pair {
      double score;
      std::size_t z, y;
    };
    std::vector<Pair> pairs;
    for (std::size_t z = 0; z < r.scores.size(); ++z)
      for (std::size_t y = 0; y < r.scores[z].size(); ++y) pairs.push_back({r.scores[z][y], z, y});
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& a, const Pair& b) { return a.score > b.score; });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const Hypothesis& z = r.asr[pairs[k].z];
      const Hypothesis& y = r.mt[pairs[k].z][pairs[k].y];
      WriteNBestRecord(coupled_nbest,
                       {e.id, static_cast<int>(k) + 1, z.log_likelihood + y.log_likelihood,
                        z.normalized + y.normalized, vocabs.translation->Decode(y.Content())});
    }
    s.timing.push_back(ut);
    char line[256];
    std::snprintf(line, sizeof line, "%s\t%.3f\t%.3f\t%.3f\t%d\t%d\t%.17g\t%.17g\n", e.id.c_str(),
                  ut.asr_ms, ut.mt_ms, total_ms, r.best_z + 1, r.best_y + 1, r.best_score,
                  r.scores[0][0]);
    timing << line;
  }
  WriteHypotheses((dir / "transcript.1best").string(), transcripts);
  WriteHypotheses((dir / "translation.1best").string(), translations);
  WriteHypotheses((dir / "pipeline.1best").string(), pipeline);
  for (const char* f : {"transcript.1best", "translation.1best", "pipeline.1best", "asr.nbest",
                        "coupled.nbest", "timing.tsv"})
    s.files.push_back((dir / f).string());
  return s;
}

std::vector<std::string> RunTextTranslation(const MtModel<float>& model,
                                            const Vocabularies& vocabs,
                                            const std::vector<Example>& examples,
                                            const DecodingConfig& options,
                                            const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::ofstream nbest = OpenOut((dir / "mt.nbest").string());
  std::vector<std::pair<std::string, std::string>> best;
  for (const Example& e : examples) {
    DecoderScorer<float> scorer = MtScorer(model, MtSource<float>::FromTokens({e.transcript}));
    EnsembleSpec spec;
    spec.members = {&scorer};
    const NBestList list = BeamSearch(spec, Options(options.mt_beam, options.mt_alpha, options.max_len));
    for (std::size_t k = 0; k < list.size(); ++k)
      WriteNBestRecord(nbest, {e.id, static_cast<int>(k) + 1, list[k].log_likelihood,
                               list[k].normalized, vocabs.translation->Decode(list[k].Content())});
    best.push_back({e.id, vocabs.translation->Decode(list.at(0).Content())});
  }
  WriteHypotheses((dir / "translation.1best").string(), best);
  return {(dir / "translation.1best").string(), (dir / "mt.nbest").string()};
}

}  // namespace slt
