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

#include "slt/model/models.h"

#include <cmath>

#include "slt/error.h"
#include "slt/text/subword.h"

namespace slt {
namespace {

void RequireTokens(const std::vector<std::vector<int>>& rows, int vocab, const char* what,
                   bool allow_empty = false) {
  for (const auto& row : rows) {
    if (row.empty() && !allow_empty) throw Error(std::string("empty ") + what);
    for (int id : row) {
      if (id < 0 || id >= vocab) {
        throw Error(std::string(what) + " token " + std::to_string(id) +
                    " is outside the vocabulary of " + std::to_string(vocab));
      }
    }
  }
}

template <typename T>
Tensor<T> EmbedInput(const Tensor<T>& x, int d_model, const ForwardContext& ctx, bool scale) {
  Tensor<T> h = scale ? ops::Scale(x, static_cast<T>(std::sqrt(static_cast<double>(d_model)))) : x;
  h = ops::Add(h, PositionalEncoding<T>(x.dim(0), x.dim(1), d_model));
  return ctx.Dropout(h);
}

}  // namespace

int SubsampledLength(int frames) {
  const int once = (frames - 1) / 2 + 1;
  return (once - 1) / 2 + 1;
}

template <typename T>
Tensor<T> PadFeatures(const std::vector<const FeatureMatrix*>& batch, int dim,
                      std::vector<int>* lengths) {
  if (batch.empty()) throw ShapeError("empty feature batch");
  int longest = 0;
  lengths->clear();
  for (const FeatureMatrix* f : batch) {
    if (f->dim != dim) {
      throw ShapeError("feature width " + std::to_string(f->dim) + ", model expects " +
                       std::to_string(dim));
    }
    if (f->frames < 1) throw ShapeError("feature matrix has no frames");
    if (!f->normalized) throw Error("features must be CMVN-normalised");
    longest = std::max(longest, f->frames);
    lengths->push_back(f->frames);
  }
  const int b_count = static_cast<int>(batch.size());
  std::vector<T> data(static_cast<std::size_t>(b_count) * longest * dim, T(0));
  for (int b = 0; b < b_count; ++b) {
    const auto& src = batch[b]->data;
    std::copy(src.begin(), src.end(), data.begin() + static_cast<std::size_t>(b) * longest * dim);
  }
  return Tensor<T>({b_count, longest, dim}, std::move(data));
}

// ---------------------------------------------------------------------------
// ASR

template <typename T>
AsrModel<T>::AsrModel(const TransformerConfig& config, std::uint64_t seed) : config_(config) {
  config_.Validate(ModelKind::kAsr);
  std::mt19937_64 rng(seed);
  const int d = config_.d_model;
  conv1_ = LinearLayer<T>(3 * config_.input_dim, d, rng);
  conv2_ = LinearLayer<T>(3 * d, d, rng);
  front_out_ = LinearLayer<T>(d, d, rng);
  encoder_ = TransformerEncoder<T>(config_.encoder_layers, d, config_.d_ff, config_.heads, rng);
  decoder_ = TransformerDecoder<T>(config_.decoder_layers, d, config_.d_ff, config_.heads,
                                   config_.target_vocab, rng);
}

template <typename T>
EncoderOutput<T> AsrModel<T>::Encode(const std::vector<const FeatureMatrix*>& batch,
                                     const ForwardContext& ctx) const {
  std::vector<int> lengths;
  Tensor<T> x = PadFeatures<T>(batch, config_.input_dim, &lengths);
  const int d = config_.d_model;
  // Masking after each convolution keeps padded frames at zero, so batched
  // and single-utterance encodings agree.
  for (int& n : lengths) n = (n - 1) / 2 + 1;
  Tensor<T> h = ops::Relu(conv1_(ops::Unfold(x, 3, 2, 1)));
  h = ops::Mul(h, LengthMask<T>(lengths, h.dim(1), d));
  for (int& n : lengths) n = (n - 1) / 2 + 1;
  h = ops::Relu(conv2_(ops::Unfold(h, 3, 2, 1)));
  h = ops::Mul(h, LengthMask<T>(lengths, h.dim(1), d));
  h = EmbedInput(front_out_(h), d, ctx, false);
  return encoder_(h, std::move(lengths), ctx);
}

template <typename T>
SequenceLoss<T> AsrModel<T>::Forward(const std::vector<const FeatureMatrix*>& batch,
                                     const std::vector<std::vector<int>>& transcripts,
                                     const ForwardContext& ctx) const {
  if (batch.size() != transcripts.size()) throw ShapeError("features/transcripts batch mismatch");
  RequireTokens(transcripts, config_.target_vocab, "transcript");
  return TeacherForcedLoss(decoder_, Encode(batch, ctx), transcripts, config_.label_smoothing,
                           ctx);
}

template <typename T>
Tensor<T> AsrModel<T>::ForcedContinuation(const FeatureMatrix& features,
                                          const std::vector<int>& hypothesis) const {
  for (int id : hypothesis) {
    if (id < 0 || id >= config_.target_vocab) {
      throw Error("hypothesis token " + std::to_string(id) + " is outside the vocabulary of " +
                  std::to_string(config_.target_vocab));
    }
  }
  std::vector<int> input = {kBosId};
  input.insert(input.end(), hypothesis.begin(), hypothesis.end());
  const int steps = static_cast<int>(input.size());
  DecoderOutput<T> out = decoder_({input}, {steps}, Encode({&features}), {});
  return ops::Reshape(out.states, {steps, config_.d_model});
}

template <typename T>
NamedParameters<T> AsrModel<T>::Parameters() const {
  NamedParameters<T> out;
  conv1_.Collect("asr.front.conv1", out);
  conv2_.Collect("asr.front.conv2", out);
  front_out_.Collect("asr.front.out", out);
  encoder_.Collect("asr.encoder", out);
  decoder_.Collect("asr.decoder", out);
  return out;
}

// ---------------------------------------------------------------------------
// MT

template <typename T>
MtSource<T> MtSource<T>::FromTokens(std::vector<std::vector<int>> tokens) {
  MtSource s;
  s.tokens = std::move(tokens);
  return s;
}

template <typename T>
MtSource<T> MtSource<T>::FromHidden(Tensor<T> hidden, std::vector<int> lengths) {
  MtSource s;
  s.hidden = std::move(hidden);
  s.lengths = std::move(lengths);
  return s;
}

template <typename T>
MtModel<T>::MtModel(const TransformerConfig& config, std::uint64_t seed) : config_(config) {
  config_.Validate(ModelKind::kMt);
  std::mt19937_64 rng(seed);
  const int d = config_.d_model;
  if (config_.mt_input == MtInputMode::kTokens) {
    std::normal_distribution<double> dist(0.0, std::pow(d, -0.5));
    std::vector<T> table(static_cast<std::size_t>(config_.input_dim) * d);
    for (T& v : table) v = static_cast<T>(dist(rng));
    source_embedding_ = Tensor<T>({config_.input_dim, d}, std::move(table), true);
  } else {
    adapter_ = LinearLayer<T>(config_.input_dim, d, rng);
  }
  encoder_ = TransformerEncoder<T>(config_.encoder_layers, d, config_.d_ff, config_.heads, rng);
  decoder_ = TransformerDecoder<T>(config_.decoder_layers, d, config_.d_ff, config_.heads,
                                   config_.target_vocab, rng);
}

template <typename T>
EncoderOutput<T> MtModel<T>::Encode(const MtSource<T>& source, const ForwardContext& ctx) const {
  const int d = config_.d_model;
  const bool hidden_mode = config_.mt_input == MtInputMode::kHidden;
  if (source.is_hidden() != hidden_mode || (!hidden_mode && source.tokens.empty())) {
    throw Error(std::string("MT model expects ") + (hidden_mode ? "hidden-state" : "token") +
                " input");
  }
  if (!hidden_mode) {
    // An empty transcript still encodes as the appended eos.
    RequireTokens(source.tokens, config_.input_dim, "source", true);
    const int b_count = static_cast<int>(source.tokens.size());
    std::vector<int> lengths;
    int longest = 0;
    for (const auto& row : source.tokens) {
      lengths.push_back(static_cast<int>(row.size()) + 1);
      longest = std::max(longest, lengths.back());
    }
    std::vector<int> ids(static_cast<std::size_t>(b_count) * longest, kPadId);
    for (int b = 0; b < b_count; ++b) {
      std::copy(source.tokens[b].begin(), source.tokens[b].end(),
                ids.begin() + static_cast<std::size_t>(b) * longest);
      ids[static_cast<std::size_t>(b) * longest + lengths[b] - 1] = kEosId;
    }
    Tensor<T> h = ops::Embedding<T>(source_embedding_, ids, {b_count, longest});
    return encoder_(EmbedInput(h, d, ctx, true), std::move(lengths), ctx);
  }
  const Tensor<T>& x = source.hidden;
  if (x.rank() != 3 || x.dim(2) != config_.input_dim) {
    throw ShapeError("hidden input " + ShapeToString(x.shape()) + ", model expects width " +
                     std::to_string(config_.input_dim));
  }
  if (static_cast<int>(source.lengths.size()) != x.dim(0)) {
    throw ShapeError("hidden input lengths do not match its batch");
  }
  for (int n : source.lengths) {
    if (n < 1 || n > x.dim(1)) throw ShapeError("hidden input length out of range");
  }
  return encoder_(EmbedInput(adapter_(x), d, ctx, false), source.lengths, ctx);
}

template <typename T>
SequenceLoss<T> MtModel<T>::Forward(const MtSource<T>& source,
                                    const std::vector<std::vector<int>>& targets,
                                    const ForwardContext& ctx) const {
  RequireTokens(targets, config_.target_vocab, "target");
  EncoderOutput<T> memory = Encode(source, ctx);
  if (memory.memory.dim(0) != static_cast<int>(targets.size())) {
    throw ShapeError("source/target batch mismatch");
  }
  return TeacherForcedLoss(decoder_, memory, targets, config_.label_smoothing, ctx);
}

template <typename T>
NamedParameters<T> MtModel<T>::Parameters() const {
  NamedParameters<T> out;
  if (config_.mt_input == MtInputMode::kTokens) {
    out.emplace_back("mt.source_embedding", source_embedding_);
  } else {
    adapter_.Collect("mt.adapter", out);
  }
  encoder_.Collect("mt.encoder", out);
  decoder_.Collect("mt.decoder", out);
  return out;
}

// ---------------------------------------------------------------------------
// Joint

template <typename T>
JointModel<T>::JointModel(const TransformerConfig& asr, TransformerConfig mt, double lambda,
                          std::uint64_t seed)
    : lambda_(lambda) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw Error("lambda must be finite and >= 0");
  mt.input_dim = asr.d_model;
  mt.mt_input = MtInputMode::kHidden;
  asr_ = AsrModel<T>(asr, seed);
  mt_ = MtModel<T>(mt, seed ^ 0x9e3779b97f4a7c15ULL);
}

template <typename T>
JointLoss<T> JointModel<T>::Forward(const std::vector<const FeatureMatrix*>& features,
                                    const std::vector<std::vector<int>>& transcripts,
                                    const std::vector<std::vector<int>>& targets,
                                    const ForwardContext& ctx) const {
  if (features.empty() || features.size() != transcripts.size() ||
      features.size() != targets.size()) {
    throw Error("joint batch needs features, transcripts and targets of equal nonzero size");
  }
  SequenceLoss<T> asr = asr_.Forward(features, transcripts, ctx);
  SequenceLoss<T> mt = mt_.Forward(MtSource<T>::FromHidden(asr.states, asr.lengths), targets, ctx);
  JointLoss<T> out;
  out.l_asr = asr.loss;
  out.l_mt = mt.loss;
  out.total = ops::Add(mt.loss, ops::Scale(asr.loss, static_cast<T>(lambda_)));
  out.report.l_asr = asr.loss.item();
  out.report.l_mt = mt.loss.item();
  out.report.l_total = out.total.item();
  out.report.asr_tokens = asr.tokens;
  out.report.mt_tokens = mt.tokens;
  return out;
}

template <typename T>
Tensor<T> JointModel<T>::ForcedContinuation(const FeatureMatrix& features,
                                            const std::vector<int>& hypothesis) const {
  return asr_.ForcedContinuation(features, hypothesis);
}

template <typename T>
NamedParameters<T> JointModel<T>::Parameters() const {
  NamedParameters<T> out = asr_.Parameters();
  NamedParameters<T> mt = mt_.Parameters();
  out.insert(out.end(), mt.begin(), mt.end());
  return out;
}

template class AsrModel<float>;
template class AsrModel<double>;
template struct MtSource<float>;
template struct MtSource<double>;
template class MtModel<float>;
template class MtModel<double>;
template class JointModel<float>;
template class JointModel<double>;
template Tensor<float> PadFeatures<float>(const std::vector<const FeatureMatrix*>&, int,
                                          std::vector<int>*);
template Tensor<double> PadFeatures<double>(const std::vector<const FeatureMatrix*>&, int,
                                            std::vector<int>*);

}  // namespace slt
