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

#ifndef SLT_MODEL_CHECKPOINT_H_
#define SLT_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "slt/model/config.h"
#include "slt/model/layers.h"

// Binary layout, all integers little-endian:
//   "SLTCKPT1"                     8-byte magic
//   u32 version (1)
//   u32 n, n bytes of JSON header  (kind, configs, lambda, vocab hashes,
//                                   step, dev_loss)
//   u32 tensor count
//   per tensor: u32 name length, name bytes, u32 rank, rank x u32 dims,
//               prod(dims) x f64 values
namespace slt {

struct CheckpointMeta {
  ModelKind kind = ModelKind::kAsr;
  TransformerConfig asr;  // kAsr and kJoint
  TransformerConfig mt;   // kMt and kJoint
  double lambda = 0.5;
  std::uint64_t transcript_vocab_hash = 0;   // ASR targets / MT source tokens
  std::uint64_t translation_vocab_hash = 0;  // MT targets
  std::int64_t step = 0;
  double dev_loss = std::numeric_limits<double>::quiet_NaN();
};

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  CheckpointMeta meta;
  std::vector<StoredTensor> tensors;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::string& path);

// Throws Error naming the first field that differs ("kind", "asr.d_model",
// "translation_vocab_hash", ...). Training progress fields are ignored.
void RequireCompatible(const CheckpointMeta& expected, const CheckpointMeta& actual);

template <typename T>
Checkpoint CaptureCheckpoint(const NamedParameters<T>& params, const CheckpointMeta& meta);

// Copies stored values into `params`; names and shapes must match exactly.
template <typename T>
void RestoreCheckpoint(const Checkpoint& checkpoint, const NamedParameters<T>& params);

}  // namespace slt

#endif  // SLT_MODEL_CHECKPOINT_H_
