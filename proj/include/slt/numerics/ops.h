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

#ifndef SLT_NUMERICS_OPS_H_
#define SLT_NUMERICS_OPS_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "slt/numerics/tape.h"
#include "slt/numerics/tensor.h"

// Differentiable primitives. Every op checks that its forward result is
// finite and, when a tape is active and some input requires a gradient,
// records a backward rule on that tape. There is no implicit broadcasting
// except for attention masks.
namespace slt::ops {

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Scale(const Tensor<T>& a, T factor);
template <typename T>
Tensor<T> Relu(const Tensor<T>& a);
template <typename T>
Tensor<T> Sum(const Tensor<T>& a);
template <typename T>
Tensor<T> Mean(const Tensor<T>& a);
template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, Shape shape);

// 2-D matrix product [M,K] x [K,N].
template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b);

// Affine map over the last axis: x[..., in] * weight[in, out] + bias[out].
// `bias` may be undefined.
template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias);

// Numerically stable softmax along `axis` (negative axes count from the end).
template <typename T>
Tensor<T> Softmax(const Tensor<T>& logits, int axis);

// Normalises each row of the last axis to zero mean / unit (population)
// variance, then applies gain and bias.
template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gain,
                    const Tensor<T>& bias, T epsilon);

// Boolean attention mask of shape [Bm, Qm, K]; true = may attend.
// Bm must divide the score batch B (batch b uses mask row b / (B / Bm), so
// heads split with SplitHeads share their sequence's mask) and Qm is 1 or
// the query length.
struct AttentionMask {
  int batch = 1;
  int queries = 1;
  int keys = 0;
  std::vector<std::uint8_t> allowed;

  static AttentionMask Open(int batch, int queries, int keys);
  bool at(int b, int q, int k) const {
    return allowed[(static_cast<std::size_t>(b) * queries + q) * keys + k] != 0;
  }
};

// softmax(Q K^T / sqrt(d_k) + mask) V over [B,Tq,dk] x [B,Tk,dk] x [B,Tk,dv].
// Masked positions receive exactly zero weight; a fully masked query row
// yields a zero output row. `mask` may be null.
template <typename T>
Tensor<T> ScaledDotAttention(const Tensor<T>& queries, const Tensor<T>& keys,
                             const Tensor<T>& values,
                             const AttentionMask* mask);

// [B, T, H*d] -> [B*H, T, d] and back.
template <typename T>
Tensor<T> SplitHeads(const Tensor<T>& x, int heads);
template <typename T>
Tensor<T> MergeHeads(const Tensor<T>& x, int heads);

// Row gather from table[V, d]; result has shape ids_shape + [d].
template <typename T>
Tensor<T> Embedding(const Tensor<T>& table, std::span<const int> ids,
                    const Shape& ids_shape);

// Frame stacking for strided 1-D convolution: [B, T, D] ->
// [B, T', kernel*D] with zero padding `pad` on both ends and
// T' = (T + 2 pad - kernel) / stride + 1.
template <typename T>
Tensor<T> Unfold(const Tensor<T>& x, int kernel, int stride, int pad);

// Inverted dropout; identity when p == 0.
template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, double p, std::mt19937_64& rng);

// Mean label-smoothed cross entropy over rows of logits[N, V] whose target
// differs from `ignore_index`. Smoothing mixes the one-hot target with a
// uniform distribution over all V classes: q = (1-eps) onehot + eps / V.
template <typename T>
Tensor<T> CrossEntropy(const Tensor<T>& logits, std::span<const int> targets,
                       T smoothing, int ignore_index, int* counted = nullptr);

// Throws NumericError naming `what` if any value is NaN or infinite.
template <typename T>
void CheckFinite(std::span<const T> values, const char* what);

}  // namespace slt::ops

#endif  // SLT_NUMERICS_OPS_H_
