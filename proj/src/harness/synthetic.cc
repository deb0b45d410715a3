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

#include "slt/harness/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "slt/error.h"

namespace slt {
namespace {

constexpr const char* kConsonants = "kmnprst";
constexpr const char* kVowels = "aeiou";

std::string JoinIndices(const std::vector<std::string>& words, const std::vector<int>& idx) {
  std::string out;
  for (int i : idx) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace

std::string RuleName(TransformRule rule) {
  switch (rule) {
    case TransformRule::kReverse: return "reverse";
    case TransformRule::kShiftMap: return "shift-map";
    case TransformRule::kLocalReorder: return "local-reorder";
  }
  throw Error("unknown transform rule");
}

TransformRule ParseRule(const std::string& name) {
  if (name == "reverse") return TransformRule::kReverse;
  if (name == "shift-map") return TransformRule::kShiftMap;
  if (name == "local-reorder") return TransformRule::kLocalReorder;
  throw Error("unknown transform rule '" + name + "'");
}

void SyntheticTaskSpec::Validate() const {
  if (vocabulary_size < 2) throw Error("synthetic vocabulary size must be at least 2");
  const int syllables = 7 * 5;
  if (2 * vocabulary_size > syllables * syllables)
    throw Error("synthetic vocabulary size is too large for the pseudo-word inventory");
  if (min_length < 1 || max_length < min_length)
    throw Error("utterance length range must satisfy 1 <= min <= max");
  if (!tone_hz.empty() && static_cast<int>(tone_hz.size()) != vocabulary_size)
    throw Error("tone map needs one frequency per source word");
  for (double f : tone_hz)
    if (!(f > 0) || f >= sample_rate / 2.0) throw Error("tone frequencies must lie in (0, Nyquist)");
  if (noise_level < 0) throw Error("noise level must be nonnegative");
  if (!(word_seconds > 0) || gap_seconds < 0) throw Error("word and gap durations are invalid");
  if (sample_rate < 8000) throw Error("sample rate must be at least 8000");
  if (train_size < 1 || dev_size < 1 || test_size < 1) throw Error("every split needs utterances");
  if (talk_size < 1) throw Error("talk size must be positive");
}

nlohmann::json ToJson(const SyntheticTaskSpec& s) {
  return {{"seed", s.seed},
          {"vocabulary_size", s.vocabulary_size},
          {"min_length", s.min_length},
          {"max_length", s.max_length},
          {"rule", RuleName(s.rule)},
          {"shift", s.shift},
          {"tone_hz", s.tone_hz},
          {"tone_amplitude", s.tone_amplitude},
          {"noise_level", s.noise_level},
          {"word_seconds", s.word_seconds},
          {"gap_seconds", s.gap_seconds},
          {"sample_rate", s.sample_rate},
          {"train_size", s.train_size},
          {"dev_size", s.dev_size},
          {"test_size", s.test_size},
          {"talk_size", s.talk_size}};
}

SyntheticTaskSpec SyntheticTaskSpecFromJson(const nlohmann::json& j) {
  SyntheticTaskSpec s;
  static const std::set<std::string> known = {
      "seed",        "vocabulary_size", "min_length",  "max_length", "rule",       "shift",
      "tone_hz",     "tone_amplitude",  "noise_level", "word_seconds", "gap_seconds",
      "sample_rate", "train_size",      "dev_size",    "test_size",  "talk_size"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error("unknown task field '" + key + "'");
  s.seed = j.value("seed", s.seed);
  s.vocabulary_size = j.value("vocabulary_size", s.vocabulary_size);
  s.min_length = j.value("min_length", s.min_length);
  s.max_length = j.value("max_length", s.max_length);
  if (j.contains("rule")) s.rule = ParseRule(j.at("rule").get<std::string>());
  s.shift = j.value("shift", s.shift);
  s.tone_hz = j.value("tone_hz", s.tone_hz);
  s.tone_amplitude = j.value("tone_amplitude", s.tone_amplitude);
  s.noise_level = j.value("noise_level", s.noise_level);
  s.word_seconds = j.value("word_seconds", s.word_seconds);
  s.gap_seconds = j.value("gap_seconds", s.gap_seconds);
  s.sample_rate = j.value("sample_rate", s.sample_rate);
  s.train_size = j.value("train_size", s.train_size);
  s.dev_size = j.value("dev_size", s.dev_size);
  s.test_size = j.value("test_size", s.test_size);
  s.talk_size = j.value("talk_size", s.talk_size);
  return s;
}

Lexicon MakeLexicon(std::uint64_t seed, int size) {
  if (size < 2) throw Error("synthetic vocabulary size must be at least 2");
  std::vector<std::string> syllables;
  for (const char* c = kConsonants; *c; ++c)
    for (const char* v = kVowels; *v; ++v) syllables.push_back(std::string{*c, *v});
  std::vector<std::string> words;
  for (const auto& a : syllables)
    for (const auto& b : syllables)
      if (a != b) words.push_back(a + b);
  if (static_cast<int>(words.size()) < 2 * size)
    throw Error("synthetic vocabulary size is too large for the pseudo-word inventory");
  std::mt19937_64 rng(seed);
  std::shuffle(words.begin(), words.end(), rng);
  Lexicon lex;
  lex.source.assign(words.begin(), words.begin() + size);
  lex.target.assign(words.begin() + size, words.begin() + 2 * size);
  return lex;
}

std::vector<double> DefaultToneLadder(int size) {
  std::vector<double> hz(size);
  const double lo = 300.0, hi = 4000.0;
  for (int i = 0; i < size; ++i)
    hz[i] = size == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (size - 1));
  return hz;
}

std::vector<int> ApplyRule(TransformRule rule, int shift, int n, const std::vector<int>& words) {
  for (int w : words)
    if (w < 0 || w >= n) throw Error("word index out of range");
  std::vector<int> out = words;
  switch (rule) {
    case TransformRule::kReverse:
      std::reverse(out.begin(), out.end());
      break;
    case TransformRule::kShiftMap:
      for (int& w : out) w = ((w + shift) % n + n) % n;
      break;
    case TransformRule::kLocalReorder:
      for (std::size_t i = 0; i + 1 < out.size(); i += 2) std::swap(out[i], out[i + 1]);
      break;
  }
  return out;
}

Waveform RenderUtterance(const SyntheticTaskSpec& spec, const std::vector<int>& words,
                         std::uint64_t noise_seed) {
  const std::vector<double> tones =
      spec.tone_hz.empty() ? DefaultToneLadder(spec.vocabulary_size) : spec.tone_hz;
  const int word_n = static_cast<int>(std::lround(spec.word_seconds * spec.sample_rate));
  const int gap_n = static_cast<int>(std::lround(spec.gap_seconds * spec.sample_rate));
  Waveform wave;
  wave.sample_rate = spec.sample_rate;
  wave.samples.assign(static_cast<std::size_t>(gap_n), 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int w : words) {
    if (w < 0 || w >= static_cast<int>(tones.size())) throw Error("word index out of range");
    for (int i = 0; i < word_n; ++i) {
      const double taper = 0.5 - 0.5 * std::cos(two_pi * (i + 0.5) / word_n);
      wave.samples.push_back(spec.tone_amplitude * taper *
                             std::sin(two_pi * tones[w] * i / spec.sample_rate));
    }
    wave.samples.insert(wave.samples.end(), static_cast<std::size_t>(gap_n), 0.0);
  }
  if (spec.noise_level > 0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, spec.noise_level);
    for (double& s : wave.samples) s += noise(rng);
  }
  for (double& s : wave.samples) s = std::clamp(s, -1.0, 1.0);
  return wave;
}

Manifest GenerateSyntheticTask(const SyntheticTaskSpec& spec, const std::string& out_dir) {
  spec.Validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "wav");
  const Lexicon lex = MakeLexicon(spec.seed, spec.vocabulary_size);

  std::mt19937_64 rng(spec.seed * 0x2545f4914f6cdd1dULL + 1);
  std::uniform_int_distribution<int> length(spec.min_length, spec.max_length);
  std::uniform_int_distribution<int> word(0, spec.vocabulary_size - 1);
  auto sample = [&] {
    std::vector<int> s(length(rng));
    for (int& w : s) w = word(rng);
    return s;
  };
  double space = 0;
  for (int len = spec.min_length; len <= spec.max_length; ++len)
    space += std::pow(static_cast<double>(spec.vocabulary_size), len);

  std::set<std::vector<int>> train_sentences;
  Manifest manifest;
  manifest.base_dir = out_dir;
  int index = 0;
  const std::pair<const char*, int> splits[] = {
      {"train", spec.train_size}, {"dev", spec.dev_size}, {"test", spec.test_size}};
  for (const auto& [split, count] : splits) {
    const bool held_out = std::string(split) != "train";
    // Held-out sentences avoid train ones unless train already covers most
    // of the sentence space.
    const bool avoid = held_out && static_cast<double>(train_sentences.size()) < 0.9 * space;
    for (int i = 0; i < count; ++i, ++index) {
      std::vector<int> words = sample();
      for (int tries = 0; avoid && train_sentences.count(words) && tries < 1000; ++tries)
        words = sample();
      if (!held_out) train_sentences.insert(words);
      char id[32], talk[48];
      std::snprintf(id, sizeof id, "utt%06d", index);
      std::snprintf(talk, sizeof talk, "%s-talk%03d", split, i / spec.talk_size);
      ManifestRecord rec;
      rec.id = id;
      rec.talk = talk;
      rec.split = split;
      rec.audio = std::string("wav/") + id + ".wav";
      rec.transcript = JoinIndices(lex.source, words);
      rec.translation =
          JoinIndices(lex.target, ApplyRule(spec.rule, spec.shift, spec.vocabulary_size, words));
      const std::uint64_t noise_seed = spec.seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
      WriteWav((fs::path(out_dir) / rec.audio).string(), RenderUtterance(spec, words, noise_seed));
      manifest.records.push_back(std::move(rec));
    }
  }
  WriteManifest((fs::path(out_dir) / "manifest.tsv").string(), manifest);
  std::ofstream task((fs::path(out_dir) / "task.json").string());
  if (!task) throw Error("cannot write task description in " + out_dir);
  task << ToJson(spec).dump(2) << '\n';
  return manifest;
}

}  // namespace slt
