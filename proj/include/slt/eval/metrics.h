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

#ifndef SLT_EVAL_METRICS_H_
#define SLT_EVAL_METRICS_H_

#include <array>
#include <string>
#include <vector>

namespace slt {

using Words = std::vector<std::string>;

// Whitespace tokenisation.
Words SplitOnSpace(const std::string& text);
std::string JoinWords(const Words& words);

enum class EditOp { kHit, kSubstitution, kDeletion, kInsertion };

struct AlignedPair {
  EditOp op;
  int ref = -1;  // index into the reference, -1 for insertions
  int hyp = -1;  // index into the hypothesis, -1 for deletions
};

struct EditAlignment {
  int hits = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  std::vector<AlignedPair> pairs;

  int errors() const { return substitutions + deletions + insertions; }
  int reference_length() const { return hits + substitutions + deletions; }
  double wer() const { return static_cast<double>(errors()) / reference_length(); }
};

// Unit-cost Levenshtein alignment. Among equal-cost alignments the
// backtrace prefers hit, then substitution, deletion, insertion.
// An empty reference is an error.
EditAlignment Align(const Words& reference, const Words& hypothesis);

// Plain edit distance; either side may be empty.
int EditDistance(const Words& reference, const Words& hypothesis);

// Clipped n-gram counts for n = 1..4 plus lengths.
struct BleuStats {
  std::array<long, 4> matches{};
  std::array<long, 4> totals{};
  long hyp_length = 0;
  long ref_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats SentenceBleuStats(const Words& reference, const Words& hypothesis);

struct BleuScore {
  double bleu = 0;                      // 0..100
  std::array<double, 4> precisions{};   // smoothed
  double brevity_penalty = 1;
  long hyp_length = 0;
  long ref_length = 0;
};

// BLEU = 100 * BP * exp(mean_n ln p_n). p_1 = m_1 / c_1; for n >= 2,
// p_n = (m_n + 1) / (c_n + 1). BP = exp(1 - r / c) when c < r, else 1.
// An empty hypothesis (c_1 = 0) or p_1 = 0 scores 0.
BleuScore ScoreBleu(const BleuStats& stats);

struct TalkBleu {
  std::string talk;
  BleuScore score;
  int segments = 0;
};

struct BleuReport {
  std::vector<TalkBleu> talks;  // sorted by talk id
  double average = 0;           // unweighted mean over talks
};

struct ScoredSegment {
  std::string talk;
  std::string reference;
  std::string hypothesis;
};

// Corpus BLEU per talk and their unweighted mean.
BleuReport CorpusBleu(const std::vector<ScoredSegment>& segments);

struct SegmentationResult {
  std::vector<Words> segments;  // one per reference segment
  int errors = 0;
  int reference_words = 0;
  double wer() const {
    return reference_words == 0 ? 0.0 : static_cast<double>(errors) / reference_words;
  }
};

// Splits `stream` into as many contiguous pieces as there are references so
// that the summed edit distance is minimal. Ties take the earliest cut.
SegmentationResult MwerSegment(const Words& stream, const std::vector<Words>& references);

}  // namespace slt

#endif  // SLT_EVAL_METRICS_H_
