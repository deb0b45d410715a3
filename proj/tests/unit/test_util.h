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

#ifndef SLT_TESTS_TEST_UTIL_H_
#define SLT_TESTS_TEST_UTIL_H_

#include <random>
#include <vector>

#include "slt/numerics/tensor.h"

namespace slt::testing {

template <typename T = double>
Tensor<T> RandomTensor(Shape shape, std::mt19937_64& rng, double scale = 1.0,
                       bool requires_grad = false) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<T> data(ShapeSize(shape));
  for (T& v : data) v = static_cast<T>(dist(rng));
  return Tensor<T>(std::move(shape), std::move(data), requires_grad);
}

inline std::vector<int> RandomIds(int count, int low, int high,
                                  std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(low, high - 1);
  std::vector<int> ids(count);
  for (int& id : ids) id = dist(rng);
  return ids;
}

}  // namespace slt::testing

#endif  // SLT_TESTS_TEST_UTIL_H_
