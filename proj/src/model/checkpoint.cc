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

#include "slt/model/checkpoint.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "slt/error.h"

namespace slt {
namespace {

constexpr char kMagic[8] = {'S', 'L', 'T', 'C', 'K', 'P', 'T', '1'};

void PutU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("truncated checkpoint");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void PutF64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double GetF64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("truncated checkpoint");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string GetBytes(std::istream& in, std::uint32_t n) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw Error("truncated checkpoint");
  return s;
}

nlohmann::json MetaToJson(const CheckpointMeta& m) {
  nlohmann::json j = {
      {"kind", ModelKindName(m.kind)},
      {"lambda", m.lambda},
      {"transcript_vocab_hash", m.transcript_vocab_hash},
      {"translation_vocab_hash", m.translation_vocab_hash},
      {"step", m.step},
  };
  if (std::isfinite(m.dev_loss)) j["dev_loss"] = m.dev_loss;
  if (m.kind != ModelKind::kMt) j["asr"] = ToJson(m.asr);
  if (m.kind != ModelKind::kAsr) j["mt"] = ToJson(m.mt);
  return j;
}

CheckpointMeta MetaFromJson(const nlohmann::json& j) {
  CheckpointMeta m;
  m.kind = ParseModelKind(j.at("kind").get<std::string>());
  m.lambda = j.at("lambda").get<double>();
  m.transcript_vocab_hash = j.at("transcript_vocab_hash").get<std::uint64_t>();
  m.translation_vocab_hash = j.at("translation_vocab_hash").get<std::uint64_t>();
  m.step = j.at("step").get<std::int64_t>();
  if (j.contains("dev_loss")) m.dev_loss = j.at("dev_loss").get<double>();
  if (j.contains("asr")) m.asr = TransformerConfigFromJson(j.at("asr"));
  if (j.contains("mt")) m.mt = TransformerConfigFromJson(j.at("mt"));
  return m;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out.write(kMagic, 8);
  PutU32(out, kCheckpointVersion);
  const std::string header = MetaToJson(c.meta).dump();
  PutU32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  PutU32(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (const StoredTensor& t : c.tensors) {
    if (static_cast<std::size_t>(ShapeSize(t.shape)) != t.values.size())
      throw ShapeError("stored tensor " + t.name + " has inconsistent size");
    PutU32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    PutU32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) PutU32(out, static_cast<std::uint32_t>(d));
    for (double v : t.values) PutF64(out, v);
  }
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(path + " is not a checkpoint");
  const std::uint32_t version = GetU32(in);
  if (version != kCheckpointVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.meta = MetaFromJson(nlohmann::json::parse(GetBytes(in, GetU32(in))));
  const std::uint32_t count = GetU32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = GetBytes(in, GetU32(in));
    const std::uint32_t rank = GetU32(in);
    for (std::uint32_t r = 0; r < rank; ++r) t.shape.push_back(static_cast<int>(GetU32(in)));
    t.values.resize(ShapeSize(t.shape));
    for (double& v : t.values) v = GetF64(in);
    c.tensors.push_back(std::move(t));
  }
  return c;
}

void RequireCompatible(const CheckpointMeta& expected, const CheckpointMeta& actual) {
  auto fail = [](const std::string& field) {
    throw Error("checkpoint mismatch in field '" + field + "'");
  };
  if (expected.kind != actual.kind) fail("kind");
  if (expected.kind != ModelKind::kMt) {
    const std::string diff = FirstConfigDifference(expected.asr, actual.asr);
    if (!diff.empty()) fail("asr." + diff);
  }
  if (expected.kind != ModelKind::kAsr) {
    const std::string diff = FirstConfigDifference(expected.mt, actual.mt);
    if (!diff.empty()) fail("mt." + diff);
  }
  if (expected.kind == ModelKind::kJoint && expected.lambda != actual.lambda) fail("lambda");
  if (expected.transcript_vocab_hash != actual.transcript_vocab_hash)
    fail("transcript_vocab_hash");
  if (expected.translation_vocab_hash != actual.translation_vocab_hash)
    fail("translation_vocab_hash");
}

template <typename T>
Checkpoint CaptureCheckpoint(const NamedParameters<T>& params, const CheckpointMeta& meta) {
  Checkpoint c;
  c.meta = meta;
  for (const auto& [name, tensor] : params) {
    StoredTensor t{name, tensor.shape(), {}};
    t.values.assign(tensor.data().begin(), tensor.data().end());
    c.tensors.push_back(std::move(t));
  }
  return c;
}

template <typename T>
void RestoreCheckpoint(const Checkpoint& c, const NamedParameters<T>& params) {
  if (c.tensors.size() != params.size()) {
    throw Error("checkpoint holds " + std::to_string(c.tensors.size()) + " tensors, model has " +
                std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const StoredTensor& stored = c.tensors[i];
    const auto& [name, tensor] = params[i];
    if (stored.name != name) throw Error("checkpoint tensor " + stored.name + " where " + name +
                                         " was expected");
    if (stored.shape != tensor.shape()) {
      throw ShapeError("checkpoint tensor " + name + " has shape " +
                       ShapeToString(stored.shape) + ", model has " +
                       ShapeToString(tensor.shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T> tensor = params[i].second;
    auto data = tensor.mutable_data();
    const auto& values = c.tensors[i].values;
    for (std::size_t k = 0; k < data.size(); ++k) data[k] = static_cast<T>(values[k]);
  }
}

template Checkpoint CaptureCheckpoint<float>(const NamedParameters<float>&, const CheckpointMeta&);
template Checkpoint CaptureCheckpoint<double>(const NamedParameters<double>&,
                                              const CheckpointMeta&);
template void RestoreCheckpoint<float>(const Checkpoint&, const NamedParameters<float>&);
template void RestoreCheckpoint<double>(const Checkpoint&, const NamedParameters<double>&);

}  // namespace slt
