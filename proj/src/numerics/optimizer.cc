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

#include "slt/numerics/optimizer.h"

#include <algorithm>
#include <cmath>

#include "slt/numerics/ops.h"

namespace slt {

double NoamLearningRate(const OptimizerOptions& options, std::int64_t step) {
  if (step < 1) throw Error("learning-rate schedule is defined for step >= 1");
  const double t = static_cast<double>(step);
  const double warmup = static_cast<double>(options.warmup_steps);
  return options.scale * std::pow(options.d_model, -0.5) *
         std::min(std::pow(t, -0.5), t * std::pow(warmup, -1.5));
}

template <typename T>
double AdamOptimizer<T>::Step(std::vector<Tensor<T>>& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeError("optimizer was built for " + std::to_string(m_.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (m_[i].size() != params[i].size()) {
      throw ShapeError("moment buffer size mismatch for parameter " + std::to_string(i));
    }
    auto g = params[i].grad();
    ops::CheckFinite(g, "gradient");
    for (T x : g) norm_sq += static_cast<double>(x) * x;
  }
  double clip = 1.0;
  if (options_.clip_norm > 0.0) {
    const double norm = std::sqrt(norm_sq);
    if (norm > options_.clip_norm) clip = options_.clip_norm / norm;
  }

  ++step_;
  const double lr = NoamLearningRate(options_, step_);
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = params[i].grad();
    auto w = params[i].mutable_data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = static_cast<double>(g[j]) * clip;
      m[j] = b1 * m[j] + (1.0 - b1) * gj;
      v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      w[j] = static_cast<T>(w[j] - lr * m_hat / (std::sqrt(v_hat) + options_.epsilon));
    }
  }
  return lr;
}

template class AdamOptimizer<float>;
template class AdamOptimizer<double>;

}  // namespace slt
