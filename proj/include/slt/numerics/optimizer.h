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

#ifndef SLT_NUMERICS_OPTIMIZER_H_
#define SLT_NUMERICS_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "slt/numerics/tensor.h"

namespace slt {

struct OptimizerOptions {
  double scale = 1.0;        // peak learning-rate multiplier
  int d_model = 64;
  int warmup_steps = 400;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  double clip_norm = 0.0;    // global gradient-norm clip; 0 disables
};

// Inverse-square-root schedule with linear warmup:
//   lr(t) = scale * d_model^-0.5 * min(t^-0.5, t * warmup^-1.5),  t >= 1.
double NoamLearningRate(const OptimizerOptions& options, std::int64_t step);

// Adam moments plus the schedule counter. One moment buffer pair per
// parameter, matched by position in the parameter list.
template <typename T>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(OptimizerOptions options) : options_(options) {}

  // Applies one update using each parameter's accumulated gradient.
  // A non-finite gradient raises NumericError before anything is modified.
  // Returns the learning rate that was used.
  double Step(std::vector<Tensor<T>>& params);

  std::int64_t step() const { return step_; }
  const OptimizerOptions& options() const { return options_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  OptimizerOptions options_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace slt

#endif  // SLT_NUMERICS_OPTIMIZER_H_
