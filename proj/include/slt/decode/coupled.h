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

#ifndef SLT_DECODE_COUPLED_H_
#define SLT_DECODE_COUPLED_H_

#include <functional>
#include <vector>

#include "slt/decode/beam_search.h"

namespace slt {

struct CoupledOptions {
  // false: sum raw log-likelihoods log P(y|z) + log P(z|x).
  // true: sum the length-normalized scores instead.
  bool normalized = false;
};

struct CoupledResult {
  NBestList asr;                            // transcript candidates z
  std::vector<NBestList> mt;                // translations y for each z
  std::vector<std::vector<double>> scores;  // scores[z][y]
  int best_z = -1;
  int best_y = -1;
  double best_score = 0.0;

  const Hypothesis& transcript() const { return asr.at(best_z); }
  const Hypothesis& translation() const { return mt.at(best_z).at(best_y); }
};

// Picks the (z, y) pair with the highest combined score over the cross
// product of the two n-best levels. The first pair in (z, y) order wins ties.
CoupledResult CombineNBest(NBestList asr, std::vector<NBestList> mt,
                           const CoupledOptions& options = {});

// Runs the transcript search, translates every candidate, then combines.
CoupledResult CoupledDecode(const std::function<NBestList()>& asr_search,
                            const std::function<NBestList(const Hypothesis&)>& mt_search,
                            const CoupledOptions& options = {});

}  // namespace slt

#endif  // SLT_DECODE_COUPLED_H_
