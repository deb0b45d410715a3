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

#ifndef SLT_DECODE_AVERAGING_H_
#define SLT_DECODE_AVERAGING_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "slt/decode/beam_search.h"
#include "slt/model/checkpoint.h"

namespace slt {

// Element-wise mean of every parameter tensor. All inputs must share kind,
// configs and vocabularies; a mismatch names the differing field. The
// result's metadata is the first checkpoint's with step set to the largest.
Checkpoint AverageCheckpoints(const std::vector<Checkpoint>& checkpoints);

// N-best records: utterance id, rank (1-based), raw log-likelihood,
// normalized score and detokenized text, tab separated.
struct NBestRecord {
  std::string utterance;
  int rank = 0;
  double log_likelihood = 0;
  double normalized = 0;
  std::string text;
};

void WriteNBestRecord(std::ostream& out, const NBestRecord& record);
std::vector<NBestRecord> ReadNBestRecords(std::istream& in);

}  // namespace slt

#endif  // SLT_DECODE_AVERAGING_H_
