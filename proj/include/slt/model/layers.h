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

#ifndef SLT_MODEL_LAYERS_H_
#define SLT_MODEL_LAYERS_H_

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "slt/numerics/ops.h"
#include "slt/numerics/tensor.h"

namespace slt {

template <typename T>
using NamedParameters = std::vector<std::pair<std::string, Tensor<T>>>;

// Dropout is active only when `training` is set and an rng is supplied.
struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;
  double dropout = 0.0;

  template <typename T>
  Tensor<T> Dropout(const Tensor<T>& x) const {
    if (!training || rng == nullptr || dropout <= 0.0) return x;
    return ops::Dropout(x, dropout, *rng);
  }
};

template <typename T>
struct LinearLayer {
  Tensor<T> weight;  // [in, out]
  Tensor<T> bias;    // [out], undefined for bias-free layers

  LinearLayer() = default;
  LinearLayer(int in, int out, std::mt19937_64& rng, bool with_bias = true);
  Tensor<T> operator()(const Tensor<T>& x) const { return ops::Linear(x, weight, bias); }
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;
};

template <typename T>
struct LayerNormLayer {
  Tensor<T> gain;
  Tensor<T> bias;

  LayerNormLayer() = default;
  explicit LayerNormLayer(int width);
  Tensor<T> operator()(const Tensor<T>& x) const {
    return ops::LayerNorm(x, gain, bias, static_cast<T>(1e-5));
  }
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;
};

template <typename T>
struct MultiHeadAttention {
  int heads = 1;
  // The key projection has no bias: a per-query constant added to every
  // score cancels in the softmax, so such a bias never receives gradient.
  LinearLayer<T> query, key, value, output;

  MultiHeadAttention() = default;
  MultiHeadAttention(int d_model, int heads, std::mt19937_64& rng);
  // `mask` is per sequence ([B, Qm, K]); heads share it.
  Tensor<T> operator()(const Tensor<T>& queries, const Tensor<T>& memory,
                       const ops::AttentionMask* mask) const;
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;
};

template <typename T>
struct FeedForward {
  LinearLayer<T> inner, outer;

  FeedForward() = default;
  FeedForward(int d_model, int d_ff, std::mt19937_64& rng);
  Tensor<T> operator()(const Tensor<T>& x, const ForwardContext& ctx) const;
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;
};

// Pre-norm residual blocks.
template <typename T>
struct EncoderLayer {
  LayerNormLayer<T> attention_norm, ff_norm;
  MultiHeadAttention<T> attention;
  FeedForward<T> ff;

  EncoderLayer() = default;
  EncoderLayer(int d_model, int d_ff, int heads, std::mt19937_64& rng);
  Tensor<T> operator()(const Tensor<T>& x, const ops::AttentionMask& mask,
                       const ForwardContext& ctx) const;
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;
};

template <typename T>
struct DecoderLayer {
  LayerNormLayer<T> self_norm, cross_norm, ff_norm;
  MultiHeadAttention<T> self_attention, cross_attention;
  FeedForward<T> ff;

  DecoderLayer() = default;
  DecoderLayer(int d_model, int d_ff, int heads, std::mt19937_64& rng);
  Tensor<T> operator()(const Tensor<T>& x, const ops::AttentionMask& self_mask,
                       const Tensor<T>& memory, const ops::AttentionMask& memory_mask,
                       const ForwardContext& ctx) const;
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;
};

template <typename T>
struct EncoderOutput {
  Tensor<T> memory;          // [B, T, d]
  std::vector<int> lengths;  // valid steps per sequence
};

// Layer stack plus final normalisation over already-embedded inputs.
template <typename T>
class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(int layers, int d_model, int d_ff, int heads, std::mt19937_64& rng);
  EncoderOutput<T> operator()(const Tensor<T>& embedded, std::vector<int> lengths,
                              const ForwardContext& ctx) const;
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;

 private:
  std::vector<EncoderLayer<T>> layers_;
  LayerNormLayer<T> final_norm_;
};

template <typename T>
struct DecoderOutput {
  Tensor<T> states;  // [B, L, d], the pre-softmax representation
  Tensor<T> logits;  // [B, L, V]
};

template <typename T>
class TransformerDecoder {
 public:
  TransformerDecoder() = default;
  TransformerDecoder(int layers, int d_model, int d_ff, int heads, int vocab,
                     std::mt19937_64& rng);

  // `inputs` are equal-length rows (pad with kPadId); `lengths` the valid
  // prefix of each row. A memory batch of 1 is shared by every row.
  DecoderOutput<T> operator()(const std::vector<std::vector<int>>& inputs,
                              const std::vector<int>& lengths,
                              const EncoderOutput<T>& memory,
                              const ForwardContext& ctx) const;
  int vocab() const { return vocab_; }
  int d_model() const { return d_model_; }
  const LinearLayer<T>& projection() const { return projection_; }
  void Collect(const std::string& prefix, NamedParameters<T>& out) const;

 private:
  int vocab_ = 0;
  int d_model_ = 0;
  Tensor<T> embedding_;
  std::vector<DecoderLayer<T>> layers_;
  LayerNormLayer<T> final_norm_;
  LinearLayer<T> projection_;
};

struct TeacherForcedBatch {
  std::vector<std::vector<int>> inputs;   // bos + tokens, padded
  std::vector<int> targets;               // tokens + eos, padded, flattened
  std::vector<int> lengths;               // tokens + 1
};

// Builds decoder inputs/targets for a batch of token sequences.
TeacherForcedBatch MakeTeacherForcedBatch(const std::vector<std::vector<int>>& sequences);

template <typename T>
struct SequenceLoss {
  Tensor<T> loss;     // mean smoothed cross entropy per target token
  Tensor<T> states;   // [B, L+1, d]
  std::vector<int> lengths;
  int tokens = 0;
};

template <typename T>
SequenceLoss<T> TeacherForcedLoss(const TransformerDecoder<T>& decoder,
                                  const EncoderOutput<T>& memory,
                                  const std::vector<std::vector<int>>& sequences,
                                  double label_smoothing, const ForwardContext& ctx);

// Sinusoidal positions for [batch, steps, width].
template <typename T>
Tensor<T> PositionalEncoding(int batch, int steps, int width);

ops::AttentionMask PaddingMask(const std::vector<int>& lengths, int keys);
ops::AttentionMask CausalMask(const std::vector<int>& lengths, int steps);

// Constant [B, T, width] tensor with ones on valid steps, zeros on padding.
template <typename T>
Tensor<T> LengthMask(const std::vector<int>& lengths, int steps, int width);

}  // namespace slt

#endif  // SLT_MODEL_LAYERS_H_
