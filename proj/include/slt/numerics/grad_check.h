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

#ifndef SLT_NUMERICS_GRAD_CHECK_H_
#define SLT_NUMERICS_GRAD_CHECK_H_

#include <cstdint>
#include <functional>

#include "slt/numerics/tensor.h"

namespace slt {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Compares the autodiff gradient of a scalar function at `point` against
// central differences with step `epsilon`. Relative error per coordinate is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8). When
// `max_coordinates` is non-zero only that many coordinates, spread evenly
// over the tensor, are perturbed.
//
// `function` is evaluated both with and without an active tape and must not
// mutate `point`'s shape.
GradCheckResult GradCheck(
    const std::function<Tensor<double>(const Tensor<double>&)>& function,
    const Tensor<double>& point, double epsilon,
    std::size_t max_coordinates = 0);

// Variant for parameters captured inside `loss`: `parameter` is perturbed in
// place (and restored) while `loss` is re-evaluated.
GradCheckResult GradCheckParameter(const std::function<Tensor<double>()>& loss,
                                   Tensor<double> parameter, double epsilon,
                                   std::size_t max_coordinates = 0);

}  // namespace slt

#endif  // SLT_NUMERICS_GRAD_CHECK_H_
