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

#ifndef SLT_DECODE_MODEL_SCORERS_H_
#define SLT_DECODE_MODEL_SCORERS_H_

#include "slt/decode/beam_search.h"
#include "slt/model/models.h"

namespace slt {

// Runs a decoder over every prefix against one encoded input and returns
// the last position's softmax and pre-softmax state. Prefixes are
// re-decoded in full each step; the decoder is causal, so a prefix's
// distribution is identical to its teacher-forced one.
template <typename T>
class DecoderScorer : public StepScorer {
 public:
  DecoderScorer(const TransformerDecoder<T>& decoder, EncoderOutput<T> memory)
      : decoder_(decoder), memory_(std::move(memory)) {}

  int vocab() const override { return decoder_.vocab(); }
  StepResult Step(const std::vector<std::vector<int>>& prefixes) override;

 private:
  const TransformerDecoder<T>& decoder_;
  EncoderOutput<T> memory_;
};

template <typename T>
DecoderScorer<T> AsrScorer(const AsrModel<T>& model, const FeatureMatrix& features) {
  return DecoderScorer<T>(model.decoder(), model.Encode({&features}));
}

// `source` must hold exactly one utterance.
template <typename T>
DecoderScorer<T> MtScorer(const MtModel<T>& model, const MtSource<T>& source) {
  return DecoderScorer<T>(model.decoder(), model.Encode(source));
}

// Hidden-mode MT input from a hypothesis's bridge states ([steps, d]).
template <typename T>
MtSource<T> BridgeSource(const Tensor<T>& states);

}  // namespace slt

#endif  // SLT_DECODE_MODEL_SCORERS_H_
