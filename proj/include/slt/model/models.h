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

#ifndef SLT_MODEL_MODELS_H_
#define SLT_MODEL_MODELS_H_

#include <cstdint>
#include <vector>

#include "slt/audio/features.h"
#include "slt/model/config.h"
#include "slt/model/layers.h"

namespace slt {

// Speech recogniser: two stride-2 convolutions (4x subsampling) feeding a
// transformer encoder, and a decoder over transcript tokens.
template <typename T>
class AsrModel {
 public:
  AsrModel() = default;
  AsrModel(const TransformerConfig& config, std::uint64_t seed);

  const TransformerConfig& config() const { return config_; }

  // Features must be CMVN-normalised and `config.input_dim` wide.
  EncoderOutput<T> Encode(const std::vector<const FeatureMatrix*>& batch,
                          const ForwardContext& ctx = {}) const;

  // Teacher-forced loss; states are the bridge representations [B, L+1, d].
  SequenceLoss<T> Forward(const std::vector<const FeatureMatrix*>& batch,
                          const std::vector<std::vector<int>>& transcripts,
                          const ForwardContext& ctx = {}) const;

  // Decoder-top states after forcing `hypothesis` and taking one more step:
  // [hypothesis.size() + 1, d].
  Tensor<T> ForcedContinuation(const FeatureMatrix& features,
                               const std::vector<int>& hypothesis) const;

  const TransformerDecoder<T>& decoder() const { return decoder_; }
  NamedParameters<T> Parameters() const;

 private:
  TransformerConfig config_;
  LinearLayer<T> conv1_, conv2_, front_out_;
  TransformerEncoder<T> encoder_;
  TransformerDecoder<T> decoder_;
};

// One batch of MT inputs in exactly one of the two modes.
template <typename T>
struct MtSource {
  std::vector<std::vector<int>> tokens;  // token mode; eos is appended
  Tensor<T> hidden;                      // hidden mode: [B, L, input_dim]
  std::vector<int> lengths;              // hidden mode: valid steps per row

  static MtSource FromTokens(std::vector<std::vector<int>> tokens);
  static MtSource FromHidden(Tensor<T> hidden, std::vector<int> lengths);
  bool is_hidden() const { return hidden.node() != nullptr; }
};

template <typename T>
class MtModel {
 public:
  MtModel() = default;
  MtModel(const TransformerConfig& config, std::uint64_t seed);

  const TransformerConfig& config() const { return config_; }
  EncoderOutput<T> Encode(const MtSource<T>& source, const ForwardContext& ctx = {}) const;
  SequenceLoss<T> Forward(const MtSource<T>& source,
                          const std::vector<std::vector<int>>& targets,
                          const ForwardContext& ctx = {}) const;

  const TransformerDecoder<T>& decoder() const { return decoder_; }
  NamedParameters<T> Parameters() const;

 private:
  TransformerConfig config_;
  Tensor<T> source_embedding_;  // token mode
  LinearLayer<T> adapter_;      // hidden mode
  TransformerEncoder<T> encoder_;
  TransformerDecoder<T> decoder_;
};

struct LossReport {
  double l_total = 0;
  double l_mt = 0;
  double l_asr = 0;
  int mt_tokens = 0;
  int asr_tokens = 0;
};

template <typename T>
struct JointLoss {
  Tensor<T> total;  // differentiable l_mt + lambda * l_asr
  Tensor<T> l_mt;
  Tensor<T> l_asr;
  LossReport report;
};

// ASR and hidden-mode MT joined through the ASR decoder's pre-softmax states.
template <typename T>
class JointModel {
 public:
  JointModel() = default;
  // `mt.input_dim` is overwritten with the ASR width and `mt.mt_input` with
  // hidden mode.
  JointModel(const TransformerConfig& asr, TransformerConfig mt, double lambda,
             std::uint64_t seed);

  double lambda() const { return lambda_; }
  void set_lambda(double lambda) { lambda_ = lambda; }
  const AsrModel<T>& asr() const { return asr_; }
  const MtModel<T>& mt() const { return mt_; }

  JointLoss<T> Forward(const std::vector<const FeatureMatrix*>& features,
                       const std::vector<std::vector<int>>& transcripts,
                       const std::vector<std::vector<int>>& targets,
                       const ForwardContext& ctx = {}) const;

  // Bridge states for an externally produced transcript hypothesis.
  Tensor<T> ForcedContinuation(const FeatureMatrix& features,
                               const std::vector<int>& hypothesis) const;

  NamedParameters<T> Parameters() const;

 private:
  double lambda_ = 0.5;
  AsrModel<T> asr_;
  MtModel<T> mt_;
};

// Stacks [T_i, D] matrices into a zero-padded [B, T_max, D] tensor.
template <typename T>
Tensor<T> PadFeatures(const std::vector<const FeatureMatrix*>& batch, int dim,
                      std::vector<int>* lengths);

// Number of frames left after the front end's two stride-2 convolutions.
int SubsampledLength(int frames);

}  // namespace slt

#endif  // SLT_MODEL_MODELS_H_
