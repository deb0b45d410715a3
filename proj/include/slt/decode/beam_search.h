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

#ifndef SLT_DECODE_BEAM_SEARCH_H_
#define SLT_DECODE_BEAM_SEARCH_H_

#include <vector>

#include "slt/text/subword.h"

namespace slt {

struct Hypothesis {
  std::vector<int> tokens;              // ends with eos when finished
  double log_likelihood = 0.0;          // sum of step_log_probs
  std::vector<double> step_log_probs;   // one per token
  std::vector<double> states;           // tokens.size() x state_dim, optional
  int state_dim = 0;
  bool finished = false;
  bool truncated = false;               // max_len reached without eos
  double normalized = 0.0;              // score used for ranking

  // Tokens without a trailing eos.
  std::vector<int> Content(int eos = kEosId) const;
};

// Best first by normalized score.
using NBestList = std::vector<Hypothesis>;

// Next-token distributions for a batch of prefixes of equal length.
struct StepResult {
  std::vector<double> probs;   // rows x vocab
  std::vector<double> states;  // rows x state_dim (may be empty)
  int state_dim = 0;
};

class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual int vocab() const = 0;
  // Each prefix starts with the bos symbol. All prefixes have equal length.
  virtual StepResult Step(const std::vector<std::vector<int>>& prefixes) = 0;
};

struct EnsembleSpec {
  std::vector<StepScorer*> members;
  std::vector<double> weights;  // empty = uniform
  int state_member = -1;        // whose states hypotheses carry; -1 = none

  // Throws on an empty ensemble, bad weights or a vocabulary mismatch.
  void Validate() const;
  int vocab() const;
};

// Weighted average of the members' probability distributions.
StepResult EnsembleStep(const EnsembleSpec& spec,
                        const std::vector<std::vector<int>>& prefixes);

struct BeamOptions {
  int beam = 5;
  int max_len = 100;   // generated tokens, eos included
  double alpha = 0.0;  // length penalty exponent
  int bos = kBosId;
  int eos = kEosId;
  std::vector<int> banned = {kPadId, kBosId};
};

// log_likelihood / length^alpha.
double LengthNormalize(double log_likelihood, int length, double alpha);

// Length-synchronous beam search. Each step scores every (hypothesis, token)
// expansion at once and keeps the best `beam - finished` by raw score;
// expansions ending in eos leave the beam. Ties go to the lexicographically
// smaller token sequence. The final list holds up to `beam` finished
// hypotheses ranked by normalized score (shorter, then lexicographic, on
// ties); if none finished, the surviving hypotheses come back truncated.
NBestList BeamSearch(const EnsembleSpec& spec, const BeamOptions& options);

}  // namespace slt

#endif  // SLT_DECODE_BEAM_SEARCH_H_
