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

#ifndef SLT_HARNESS_SYNTHETIC_H_
#define SLT_HARNESS_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "slt/audio/features.h"
#include "slt/harness/manifest.h"

namespace slt {

// How a source word sequence becomes its translation. Every rule maps the
// words through a fixed source->target lexicon; they differ in order.
enum class TransformRule {
  kReverse,       // mapped, reversed
  kShiftMap,      // word i -> target word (i + shift) mod n, order kept
  kLocalReorder,  // mapped, adjacent pairs swapped
};

std::string RuleName(TransformRule rule);
TransformRule ParseRule(const std::string& name);

struct SyntheticTaskSpec {
  std::uint64_t seed = 17;
  int vocabulary_size = 12;  // source words
  int min_length = 2;        // words per utterance
  int max_length = 5;
  TransformRule rule = TransformRule::kReverse;
  int shift = 3;

  // One tone per source word; empty means DefaultToneLadder.
  std::vector<double> tone_hz;
  double tone_amplitude = 0.5;
  double noise_level = 0.02;  // std-dev of additive Gaussian noise
  double word_seconds = 0.12;
  double gap_seconds = 0.04;
  int sample_rate = 16000;

  int train_size = 1000;
  int dev_size = 100;
  int test_size = 100;
  int talk_size = 10;  // utterances per pseudo-talk

  void Validate() const;
  bool operator==(const SyntheticTaskSpec&) const = default;
};

nlohmann::json ToJson(const SyntheticTaskSpec& spec);
SyntheticTaskSpec SyntheticTaskSpecFromJson(const nlohmann::json& j);

struct Lexicon {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

// Distinct two-syllable pseudo-words; source and target sets are disjoint.
Lexicon MakeLexicon(std::uint64_t seed, int size);

// Geometric ladder from 300 Hz to 4 kHz.
std::vector<double> DefaultToneLadder(int size);

// Target word indices for a source word-index sequence.
std::vector<int> ApplyRule(TransformRule rule, int shift, int vocabulary_size,
                           const std::vector<int>& words);

// Each word is a Hann-tapered tone followed by a silent gap; the whole
// signal gets noise drawn from `noise_seed`.
Waveform RenderUtterance(const SyntheticTaskSpec& spec, const std::vector<int>& words,
                         std::uint64_t noise_seed);

// Writes <out_dir>/task.json, <out_dir>/wav/<id>.wav and
// <out_dir>/manifest.tsv. Splits are "train", "dev" and "test"; dev and
// test sentences never occur in train when the sentence space allows it.
Manifest GenerateSyntheticTask(const SyntheticTaskSpec& spec, const std::string& out_dir);

}  // namespace slt

#endif  // SLT_HARNESS_SYNTHETIC_H_
