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

#include "slt/model/layers.h"

#include <algorithm>
#include <cmath>

#include "slt/text/subword.h"

namespace slt {
namespace {

template <typename T>
Tensor<T> XavierUniform(int in, int out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<T> data(static_cast<std::size_t>(in) * out);
  for (T& v : data) v = static_cast<T>(dist(rng));
  return Tensor<T>({in, out}, std::move(data), true);
}

// Copies a batch-1 tensor `rows` times along the batch axis. Inference only.
template <typename T>
Tensor<T> RepeatBatch(const Tensor<T>& x, int rows) {
  if (x.dim(0) == rows) return x;
  if (x.dim(0) != 1) {
    throw ShapeError("memory batch " + std::to_string(x.dim(0)) +
                     " cannot serve " + std::to_string(rows) + " decoder rows");
  }
  if (ActiveTape<T>() != nullptr && x.requires_grad()) {
    throw Error("shared-memory decoding is not differentiable");
  }
  Shape shape = x.shape();
  shape[0] = rows;
  std::vector<T> data;
  data.reserve(x.size() * rows);
  for (int r = 0; r < rows; ++r) data.insert(data.end(), x.data().begin(), x.data().end());
  return Tensor<T>(std::move(shape), std::move(data));
}

}  // namespace

template <typename T>
LinearLayer<T>::LinearLayer(int in, int out, std::mt19937_64& rng, bool with_bias)
    : weight(XavierUniform<T>(in, out, rng)) {
  if (with_bias) bias = Tensor<T>::Zeros({out}, true);
}

template <typename T>
void LinearLayer<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  out.emplace_back(prefix + ".weight", weight);
  if (bias.defined()) out.emplace_back(prefix + ".bias", bias);
}

template <typename T>
LayerNormLayer<T>::LayerNormLayer(int width)
    : gain(Tensor<T>({width}, std::vector<T>(width, T(1)), true)),
      bias(Tensor<T>::Zeros({width}, true)) {}

template <typename T>
void LayerNormLayer<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  out.emplace_back(prefix + ".gain", gain);
  out.emplace_back(prefix + ".bias", bias);
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(int d_model, int heads, std::mt19937_64& rng)
    : heads(heads),
      query(d_model, d_model, rng),
      key(d_model, d_model, rng, false),
      value(d_model, d_model, rng),
      output(d_model, d_model, rng) {}

template <typename T>
Tensor<T> MultiHeadAttention<T>::operator()(const Tensor<T>& queries, const Tensor<T>& memory,
                                           const ops::AttentionMask* mask) const {
  Tensor<T> q = ops::SplitHeads(query(queries), heads);
  Tensor<T> k = ops::SplitHeads(key(memory), heads);
  Tensor<T> v = ops::SplitHeads(value(memory), heads);
  return output(ops::MergeHeads(ops::ScaledDotAttention(q, k, v, mask), heads));
}

template <typename T>
void MultiHeadAttention<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  query.Collect(prefix + ".query", out);
  key.Collect(prefix + ".key", out);
  value.Collect(prefix + ".value", out);
  output.Collect(prefix + ".output", out);
}

template <typename T>
FeedForward<T>::FeedForward(int d_model, int d_ff, std::mt19937_64& rng)
    : inner(d_model, d_ff, rng), outer(d_ff, d_model, rng) {}

template <typename T>
Tensor<T> FeedForward<T>::operator()(const Tensor<T>& x, const ForwardContext& ctx) const {
  return outer(ctx.Dropout(ops::Relu(inner(x))));
}

template <typename T>
void FeedForward<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  inner.Collect(prefix + ".inner", out);
  outer.Collect(prefix + ".outer", out);
}

template <typename T>
EncoderLayer<T>::EncoderLayer(int d_model, int d_ff, int heads, std::mt19937_64& rng)
    : attention_norm(d_model),
      ff_norm(d_model),
      attention(d_model, heads, rng),
      ff(d_model, d_ff, rng) {}

template <typename T>
Tensor<T> EncoderLayer<T>::operator()(const Tensor<T>& x, const ops::AttentionMask& mask,
                                     const ForwardContext& ctx) const {
  Tensor<T> normed = attention_norm(x);
  Tensor<T> h = ops::Add(x, ctx.Dropout(attention(normed, normed, &mask)));
  return ops::Add(h, ctx.Dropout(ff(ff_norm(h), ctx)));
}

template <typename T>
void EncoderLayer<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  attention_norm.Collect(prefix + ".attention_norm", out);
  attention.Collect(prefix + ".attention", out);
  ff_norm.Collect(prefix + ".ff_norm", out);
  ff.Collect(prefix + ".ff", out);
}

template <typename T>
DecoderLayer<T>::DecoderLayer(int d_model, int d_ff, int heads, std::mt19937_64& rng)
    : self_norm(d_model),
      cross_norm(d_model),
      ff_norm(d_model),
      self_attention(d_model, heads, rng),
      cross_attention(d_model, heads, rng),
      ff(d_model, d_ff, rng) {}

template <typename T>
Tensor<T> DecoderLayer<T>::operator()(const Tensor<T>& x, const ops::AttentionMask& self_mask,
                                     const Tensor<T>& memory,
                                     const ops::AttentionMask& memory_mask,
                                     const ForwardContext& ctx) const {
  Tensor<T> normed = self_norm(x);
  Tensor<T> h = ops::Add(x, ctx.Dropout(self_attention(normed, normed, &self_mask)));
  h = ops::Add(h, ctx.Dropout(cross_attention(cross_norm(h), memory, &memory_mask)));
  return ops::Add(h, ctx.Dropout(ff(ff_norm(h), ctx)));
}

template <typename T>
void DecoderLayer<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  self_norm.Collect(prefix + ".self_norm", out);
  self_attention.Collect(prefix + ".self_attention", out);
  cross_norm.Collect(prefix + ".cross_norm", out);
  cross_attention.Collect(prefix + ".cross_attention", out);
  ff_norm.Collect(prefix + ".ff_norm", out);
  ff.Collect(prefix + ".ff", out);
}

template <typename T>
TransformerEncoder<T>::TransformerEncoder(int layers, int d_model, int d_ff, int heads,
                                          std::mt19937_64& rng)
    : final_norm_(d_model) {
  for (int i = 0; i < layers; ++i) layers_.emplace_back(d_model, d_ff, heads, rng);
}

template <typename T>
EncoderOutput<T> TransformerEncoder<T>::operator()(const Tensor<T>& embedded,
                                                   std::vector<int> lengths,
                                                   const ForwardContext& ctx) const {
  const ops::AttentionMask mask = PaddingMask(lengths, embedded.dim(1));
  Tensor<T> h = embedded;
  for (const auto& layer : layers_) h = layer(h, mask, ctx);
  return {final_norm_(h), std::move(lengths)};
}

template <typename T>
void TransformerEncoder<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i].Collect(prefix + ".layers." + std::to_string(i), out);
  final_norm_.Collect(prefix + ".final_norm", out);
}

template <typename T>
TransformerDecoder<T>::TransformerDecoder(int layers, int d_model, int d_ff, int heads,
                                          int vocab, std::mt19937_64& rng)
    : vocab_(vocab), d_model_(d_model), final_norm_(d_model), projection_(d_model, vocab, rng) {
  std::normal_distribution<double> dist(0.0, std::pow(d_model, -0.5));
  std::vector<T> table(static_cast<std::size_t>(vocab) * d_model);
  for (T& v : table) v = static_cast<T>(dist(rng));
  embedding_ = Tensor<T>({vocab, d_model}, std::move(table), true);
  for (int i = 0; i < layers; ++i) layers_.emplace_back(d_model, d_ff, heads, rng);
}

template <typename T>
DecoderOutput<T> TransformerDecoder<T>::operator()(const std::vector<std::vector<int>>& inputs,
                                                   const std::vector<int>& lengths,
                                                   const EncoderOutput<T>& memory,
                                                   const ForwardContext& ctx) const {
  const int batch = static_cast<int>(inputs.size());
  if (batch == 0) throw ShapeError("decoder called with an empty batch");
  const int steps = static_cast<int>(inputs[0].size());
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(batch) * steps);
  for (const auto& row : inputs) {
    if (static_cast<int>(row.size()) != steps) throw ShapeError("ragged decoder input");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  Tensor<T> h = ops::Scale(ops::Embedding<T>(embedding_, flat, {batch, steps}),
                           static_cast<T>(std::sqrt(static_cast<double>(d_model_))));
  h = ctx.Dropout(ops::Add(h, PositionalEncoding<T>(batch, steps, d_model_)));

  Tensor<T> shared = RepeatBatch(memory.memory, batch);
  std::vector<int> memory_lengths = memory.lengths;
  if (static_cast<int>(memory_lengths.size()) != batch)
    memory_lengths.assign(batch, memory.lengths.at(0));
  const ops::AttentionMask self_mask = CausalMask(lengths, steps);
  const ops::AttentionMask memory_mask = PaddingMask(memory_lengths, shared.dim(1));
  for (const auto& layer : layers_) h = layer(h, self_mask, shared, memory_mask, ctx);
  Tensor<T> states = final_norm_(h);
  return {states, projection_(states)};
}

template <typename T>
void TransformerDecoder<T>::Collect(const std::string& prefix, NamedParameters<T>& out) const {
  out.emplace_back(prefix + ".embedding", embedding_);
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i].Collect(prefix + ".layers." + std::to_string(i), out);
  final_norm_.Collect(prefix + ".final_norm", out);
  projection_.Collect(prefix + ".projection", out);
}

TeacherForcedBatch MakeTeacherForcedBatch(const std::vector<std::vector<int>>& sequences) {
  TeacherForcedBatch batch;
  std::size_t longest = 0;
  for (const auto& s : sequences) longest = std::max(longest, s.size());
  const int steps = static_cast<int>(longest) + 1;
  for (const auto& s : sequences) {
    std::vector<int> input(steps, kPadId);
    input[0] = kBosId;
    std::copy(s.begin(), s.end(), input.begin() + 1);
    batch.inputs.push_back(std::move(input));
    for (int t = 0; t < steps; ++t) {
      if (t < static_cast<int>(s.size())) batch.targets.push_back(s[t]);
      else if (t == static_cast<int>(s.size())) batch.targets.push_back(kEosId);
      else batch.targets.push_back(kPadId);
    }
    batch.lengths.push_back(static_cast<int>(s.size()) + 1);
  }
  return batch;
}

template <typename T>
SequenceLoss<T> TeacherForcedLoss(const TransformerDecoder<T>& decoder,
                                  const EncoderOutput<T>& memory,
                                  const std::vector<std::vector<int>>& sequences,
                                  double label_smoothing, const ForwardContext& ctx) {
  for (const auto& s : sequences) {
    if (s.empty()) throw Error("empty target sequence");
  }
  TeacherForcedBatch batch = MakeTeacherForcedBatch(sequences);
  DecoderOutput<T> out = decoder(batch.inputs, batch.lengths, memory, ctx);
  const int rows = out.logits.dim(0) * out.logits.dim(1);
  SequenceLoss<T> result;
  result.loss = ops::CrossEntropy<T>(ops::Reshape(out.logits, {rows, decoder.vocab()}),
                                     batch.targets, static_cast<T>(label_smoothing), kPadId,
                                     &result.tokens);
  result.states = out.states;
  result.lengths = batch.lengths;
  return result;
}

template <typename T>
Tensor<T> PositionalEncoding(int batch, int steps, int width) {
  std::vector<T> data(static_cast<std::size_t>(batch) * steps * width);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / width);
      const T v = static_cast<T>(i % 2 == 0 ? std::sin(t * rate) : std::cos(t * rate));
      for (int b = 0; b < batch; ++b)
        data[(static_cast<std::size_t>(b) * steps + t) * width + i] = v;
    }
  }
  return Tensor<T>({batch, steps, width}, std::move(data));
}

ops::AttentionMask PaddingMask(const std::vector<int>& lengths, int keys) {
  ops::AttentionMask mask;
  mask.batch = static_cast<int>(lengths.size());
  mask.queries = 1;
  mask.keys = keys;
  mask.allowed.assign(static_cast<std::size_t>(mask.batch) * keys, 0);
  for (int b = 0; b < mask.batch; ++b)
    for (int k = 0; k < std::min(lengths[b], keys); ++k)
      mask.allowed[static_cast<std::size_t>(b) * keys + k] = 1;
  return mask;
}

ops::AttentionMask CausalMask(const std::vector<int>& lengths, int steps) {
  ops::AttentionMask mask;
  mask.batch = static_cast<int>(lengths.size());
  mask.queries = steps;
  mask.keys = steps;
  mask.allowed.assign(static_cast<std::size_t>(mask.batch) * steps * steps, 0);
  for (int b = 0; b < mask.batch; ++b)
    for (int q = 0; q < steps; ++q)
      for (int k = 0; k <= q && k < lengths[b]; ++k)
        mask.allowed[(static_cast<std::size_t>(b) * steps + q) * steps + k] = 1;
  return mask;
}

template <typename T>
Tensor<T> LengthMask(const std::vector<int>& lengths, int steps, int width) {
  const int batch = static_cast<int>(lengths.size());
  std::vector<T> data(static_cast<std::size_t>(batch) * steps * width, T(0));
  for (int b = 0; b < batch; ++b)
    std::fill_n(data.begin() + static_cast<std::size_t>(b) * steps * width,
                static_cast<std::size_t>(std::min(lengths[b], steps)) * width, T(1));
  return Tensor<T>({batch, steps, width}, std::move(data));
}

#define SLT_INSTANTIATE_LAYERS(T)                                                          \
  template struct LinearLayer<T>;                                                          \
  template struct LayerNormLayer<T>;                                                       \
  template struct MultiHeadAttention<T>;                                                   \
  template struct FeedForward<T>;                                                          \
  template struct EncoderLayer<T>;                                                         \
  template struct DecoderLayer<T>;                                                         \
  template class TransformerEncoder<T>;                                                    \
  template class TransformerDecoder<T>;                                                    \
  template SequenceLoss<T> TeacherForcedLoss<T>(const TransformerDecoder<T>&,              \
                                                const EncoderOutput<T>&,                   \
                                                const std::vector<std::vector<int>>&,      \
                                                double, const ForwardContext&);            \
  template Tensor<T> PositionalEncoding<T>(int, int, int);                                 \
  template Tensor<T> LengthMask<T>(const std::vector<int>&, int, int);

SLT_INSTANTIATE_LAYERS(float)
SLT_INSTANTIATE_LAYERS(double)

#undef SLT_INSTANTIATE_LAYERS

}  // namespace slt
