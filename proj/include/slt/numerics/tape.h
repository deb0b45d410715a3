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

#ifndef SLT_NUMERICS_TAPE_H_
#define SLT_NUMERICS_TAPE_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "slt/numerics/tensor.h"

namespace slt {

// Ordered record of differentiable operations. Operations append themselves
// while a TapeScope for this tape is active on the calling thread; inputs are
// always created before the op that consumes them, so reverse order is a
// valid topological order for backward.
template <typename T>
class Tape {
 public:
  using NodePtr = std::shared_ptr<TensorNode<T>>;
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void Record(const char* op_name, NodePtr output, BackwardFn backward) {
    entries_.push_back({op_name, std::move(output), std::move(backward)});
  }

  std::size_t size() const { return entries_.size(); }
  void Clear() { entries_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and runs every recorded backward rule once, in
  // reverse recording order. Gradients accumulate into existing buffers.
  void Backward(const Tensor<T>& loss);

 private:
  struct Entry {
    const char* op_name;
    NodePtr output;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
};

template <typename T>
Tape<T>*& ActiveTapeSlot() {
  thread_local Tape<T>* tape = nullptr;
  return tape;
}

template <typename T>
Tape<T>* ActiveTape() {
  return ActiveTapeSlot<T>();
}

// Installs a tape as the recording target for the current thread.
template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>* tape) : previous_(ActiveTapeSlot<T>()) {
    ActiveTapeSlot<T>() = tape;
  }
  ~TapeScope() { ActiveTapeSlot<T>() = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

// Disables recording on the current thread for the lifetime of the guard.
template <typename T>
class NoGradScope : public TapeScope<T> {
 public:
  NoGradScope() : TapeScope<T>(nullptr) {}
};

template <typename T>
void Tape<T>::Backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward needs a scalar loss, got " +
                     (loss.defined() ? ShapeToString(loss.shape())
                                     : std::string("undefined tensor")));
  }
  auto& seed = loss.node()->grad;
  if (seed.empty()) seed.assign(1, T(0));
  seed[0] += T(1);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output->grad.empty()) continue;  // not on a path to the loss
    it->backward();
  }
}

template <typename T>
void Backward(Tape<T>& tape, const Tensor<T>& loss) {
  tape.Backward(loss);
}

}  // namespace slt

#endif  // SLT_NUMERICS_TAPE_H_
