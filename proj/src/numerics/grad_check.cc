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

#include "slt/numerics/grad_check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "slt/numerics/tape.h"

namespace slt {
namespace {

double EvaluateScalar(const std::function<Tensor<double>()>& loss) {
  NoGradScope<double> no_grad;
  Tensor<double> value = loss();
  if (value.size() != 1) throw ShapeError("grad check needs a scalar function");
  const double v = value.item();
  if (!std::isfinite(v)) throw NumericError("grad check function evaluation");
  return v;
}

std::vector<std::size_t> Coordinates(std::size_t size, std::size_t limit) {
  std::vector<std::size_t> coords;
  if (limit == 0 || limit >= size) {
    coords.resize(size);
    for (std::size_t i = 0; i < size; ++i) coords[i] = i;
    return coords;
  }
  const double stride = static_cast<double>(size) / static_cast<double>(limit);
  for (std::size_t i = 0; i < limit; ++i)
    coords.push_back(static_cast<std::size_t>(i * stride));
  return coords;
}

}  // namespace

GradCheckResult GradCheckParameter(const std::function<Tensor<double>()>& loss,
                                   Tensor<double> parameter, double epsilon,
                                   std::size_t max_coordinates) {
  const bool had_grad_flag = parameter.requires_grad();
  parameter.set_requires_grad(true);
  parameter.ZeroGrad();
  {
    Tape<double> tape;
    TapeScope<double> scope(&tape);
    Tensor<double> value = loss();
    if (!std::isfinite(value.item())) throw NumericError("grad check function evaluation");
    tape.Backward(value);
  }
  std::vector<double> analytic(parameter.grad().begin(), parameter.grad().end());

  GradCheckResult result;
  auto data = parameter.mutable_data();
  for (std::size_t i : Coordinates(data.size(), max_coordinates)) {
    const double saved = data[i];
    data[i] = saved + epsilon;
    const double plus = EvaluateScalar(loss);
    data[i] = saved - epsilon;
    const double minus = EvaluateScalar(loss);
    data[i] = saved;
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    ++result.checked;
    if (rel > result.max_relative_error || result.checked == 1) {
      result.max_relative_error = std::max(result.max_relative_error, rel);
      if (rel >= result.max_relative_error) {
        result.worst_index = i;
        result.worst_analytic = analytic[i];
        result.worst_numeric = numeric;
      }
    }
  }
  parameter.set_requires_grad(had_grad_flag);
  return result;
}

GradCheckResult GradCheck(
    const std::function<Tensor<double>(const Tensor<double>&)>& function,
    const Tensor<double>& point, double epsilon, std::size_t max_coordinates) {
  Tensor<double> variable = point.Clone(true);
  return GradCheckParameter([&] { return function(variable); }, variable,
                            epsilon, max_coordinates);
}

}  // namespace slt
