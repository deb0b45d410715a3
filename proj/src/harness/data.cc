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

#include "slt/harness/data.h"

#include <filesystem>

#include "slt/error.h"

namespace slt {
namespace fs = std::filesystem;

namespace {

Granularity TranscriptGranularity(GranularityPair pair) {
  return pair == GranularityPair::kBpeBpe ? Granularity::kBpe : Granularity::kCharacter;
}

}  // namespace

Vocabularies BuildVocabularies(const ExperimentConfig& config, const Manifest& manifest) {
  std::vector<std::string> transcripts, translations;
  for (const ManifestRecord* r : manifest.Split("train")) {
    transcripts.push_back(NormalizeText(r->transcript));
    translations.push_back(NormalizeText(r->translation));
  }
  if (transcripts.empty()) throw Error("manifest has no train split to build vocabularies from");
  Vocabularies v;
  if (TranscriptGranularity(config.granularity) == Granularity::kBpe)
    v.transcript = std::make_shared<SubwordModel>(
        SubwordModel::LearnBpe(transcripts, config.transcript_vocab));
  else
    v.transcript = std::make_shared<SubwordModel>(SubwordModel::LearnCharacters(transcripts));
  v.translation = std::make_shared<SubwordModel>(
      SubwordModel::LearnBpe(translations, config.translation_vocab));
  return v;
}

void SaveVocabularies(const std::string& dir, const Vocabularies& v) {
  fs::create_directories(dir);
  v.transcript->SaveFile((fs::path(dir) / "transcript.vocab").string());
  v.translation->SaveFile((fs::path(dir) / "translation.vocab").string());
}

Vocabularies LoadVocabularies(const std::string& dir) {
  Vocabularies v;
  v.transcript = std::make_shared<SubwordModel>(
      SubwordModel::LoadFile((fs::path(dir) / "transcript.vocab").string()));
  v.translation = std::make_shared<SubwordModel>(
      SubwordModel::LoadFile((fs::path(dir) / "translation.vocab").string()));
  return v;
}

std::vector<Example> LoadExamples(const Manifest& manifest, const std::string& split,
                                  const Vocabularies& vocabs, int num_mels) {
  const auto records = manifest.Split(split);
  if (records.empty()) throw Error("manifest has no utterances in split '" + split + "'");
  MelOptions mel;
  mel.num_mels = num_mels;
  std::vector<Example> out;
  out.reserve(records.size());
  for (const ManifestRecord* r : records) {
    Example e;
    e.id = r->id;
    e.talk = r->talk;
    e.features = ExtractFeatures(ReadWav(manifest.ResolvePath(*r)), mel);
    e.transcript_text = NormalizeText(r->transcript);
    e.translation_text = NormalizeText(r->translation);
    e.transcript = vocabs.transcript->Encode(e.transcript_text).ids;
    e.translation = vocabs.translation->Encode(e.translation_text).ids;
    if (e.transcript.empty() || e.translation.empty())
      throw Error("utterance '" + e.id + "' has an empty transcript or translation");
    out.push_back(std::move(e));
  }
  return out;
}

ModelConfigs ResolveModelConfigs(const ExperimentConfig& config, const Vocabularies& vocabs) {
  ModelConfigs m{config.asr, config.mt};
  const Granularity transcript = vocabs.transcript->mode();
  m.asr.input_dim = 3 * config.num_mels;
  m.asr.target_vocab = vocabs.transcript->vocab_size();
  m.asr.source_granularity = transcript;
  m.asr.target_granularity = transcript;
  m.asr.mt_input = MtInputMode::kTokens;
  m.mt.input_dim = vocabs.transcript->vocab_size();
  m.mt.target_vocab = vocabs.translation->vocab_size();
  m.mt.source_granularity = transcript;
  m.mt.target_granularity = Granularity::kBpe;
  m.mt.mt_input = MtInputMode::kTokens;
  return m;
}

}  // namespace slt
