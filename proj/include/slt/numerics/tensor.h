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

#ifndef SLT_NUMERICS_TENSOR_H_
#define SLT_NUMERICS_TENSOR_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slt/error.h"

namespace slt {

using Shape = std::vector<int>;

std::string ShapeToString(const Shape& shape);
std::size_t ShapeSize(const Shape& shape);

// Storage shared between Tensor handles. The gradient buffer stays empty
// until backward first writes into it.
template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
};

// Row-major dense array handle. Copies of a Tensor alias the same node, so a
// parameter can be shared by several modules and still accumulate a single
// gradient.
template <typename T>
class Tensor {
 public:
  using Node = TensorNode<T>;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false)
      : node_(std::make_shared<Node>()) {
    for (int d : shape) {
      if (d <= 0) throw ShapeError("non-positive extent in " + ShapeToString(shape));
    }
    if (ShapeSize(shape) != data.size()) {
      throw ShapeError("data length " + std::to_string(data.size()) +
                       " does not match " + ShapeToString(shape));
    }
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
  }

  static Tensor Zeros(Shape shape, bool requires_grad = false) {
    std::size_t n = ShapeSize(shape);
    return Tensor(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }
  static Tensor Filled(Shape shape, T value) {
    std::size_t n = ShapeSize(shape);
    return Tensor(std::move(shape), std::vector<T>(n, value));
  }
  static Tensor Scalar(T value, bool requires_grad = false) {
    return Tensor({1}, {value}, requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const {
    if (axis < 0) axis += rank();
    return node_->shape.at(axis);
  }
  std::size_t size() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  // Direct mutation is reserved for parameter initialisation, optimizer
  // updates and checkpoint loading; it is never recorded on a tape.
  std::span<T> mutable_data() { return node_->data; }
  T item() const {
    if (size() != 1) throw ShapeError("item() on " + ShapeToString(shape()));
    return node_->data[0];
  }
  T at(std::size_t i) const { return node_->data.at(i); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }

  bool has_grad() const { return !node_->grad.empty(); }
  // Gradient view; an all-zero buffer is materialised if nothing was written.
  std::span<const T> grad() const {
    if (node_->grad.empty()) node_->grad.assign(node_->data.size(), T(0));
    return node_->grad;
  }
  std::span<T> mutable_grad() {
    if (node_->grad.empty()) node_->grad.assign(node_->data.size(), T(0));
    return node_->grad;
  }
  void ZeroGrad() { node_->grad.assign(node_->data.size(), T(0)); }
  void ClearGrad() { node_->grad.clear(); }

  // Deep copy detached from any graph.
  Tensor Clone(bool requires_grad = false) const {
    return Tensor(shape(), node_->data, requires_grad);
  }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

}  // namespace slt

#endif  // SLT_NUMERICS_TENSOR_H_
