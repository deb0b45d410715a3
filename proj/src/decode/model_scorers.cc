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

#include "slt/decode/model_scorers.h"

#include <algorithm>
#include <cmath>

#include "slt/error.h"

namespace slt {

template <typename T>
StepResult DecoderScorer<T>::Step(const std::vector<std::vector<int>>& prefixes) {
  if (prefixes.empty()) throw ShapeError("no prefixes to score");
  const int rows = static_cast<int>(prefixes.size());
  const int steps = static_cast<int>(prefixes[0].size());
  DecoderOutput<T> out =
      decoder_(prefixes, std::vector<int>(rows, steps), memory_, ForwardContext{});
  const int vocab = decoder_.vocab();
  const int d = decoder_.d_model();
  StepResult r;
  r.state_dim = d;
  r.probs.resize(static_cast<std::size_t>(rows) * vocab);
  r.states.resize(static_cast<std::size_t>(rows) * d);
  const auto logits = out.logits.data();
  const auto states = out.states.data();
  for (int row = 0; row < rows; ++row) {
    const std::size_t last = static_cast<std::size_t>(row) * steps + steps - 1;
    const T* z = logits.data() + last * vocab;
    double m = z[0];
    for (int v = 1; v < vocab; ++v) m = std::max(m, static_cast<double>(z[v]));
    double sum = 0;
    double* p = r.probs.data() + static_cast<std::size_t>(row) * vocab;
    for (int v = 0; v < vocab; ++v) sum += (p[v] = std::exp(z[v] - m));
    for (int v = 0; v < vocab; ++v) p[v] /= sum;
    std::copy(states.begin() + last * d, states.begin() + (last + 1) * d,
              r.states.begin() + static_cast<std::size_t>(row) * d);
  }
  return r;
}

template <typename T>
MtSource<T> BridgeSource(const Tensor<T>& states) {
  if (states.rank() != 2) throw ShapeError("bridge states must be [steps, d]");
  const int steps = states.dim(0);
  return MtSource<T>::FromHidden(ops::Reshape(states, {1, steps, states.dim(1)}), {steps});
}

template class DecoderScorer<float>;
template class DecoderScorer<double>;
template MtSource<float> BridgeSource<float>(const Tensor<float>&);
template MtSource<double> BridgeSource<double>(const Tensor<double>&);

}  // namespace slt
