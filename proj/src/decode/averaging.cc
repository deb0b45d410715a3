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

#include "slt/decode/averaging.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "slt/error.h"

namespace slt {

Checkpoint AverageCheckpoints(const std::vector<Checkpoint>& checkpoints) {
  if (checkpoints.empty()) throw Error("no checkpoints to average");
  const Checkpoint& first = checkpoints[0];
  Checkpoint out = first;
  for (std::size_t c = 1; c < checkpoints.size(); ++c) {
    const Checkpoint& other = checkpoints[c];
    RequireCompatible(first.meta, other.meta);
    if (other.tensors.size() != first.tensors.size())
      throw Error("checkpoint mismatch in field 'tensor_count'");
    for (std::size_t i = 0; i < first.tensors.size(); ++i) {
      if (other.tensors[i].name != first.tensors[i].name)
        throw Error("checkpoint mismatch in field '" + first.tensors[i].name + "'");
      if (other.tensors[i].shape != first.tensors[i].shape)
        throw Error("checkpoint mismatch in field '" + first.tensors[i].name + ".shape'");
      auto& sum = out.tensors[i].values;
      const auto& add = other.tensors[i].values;
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += add[k];
    }
    out.meta.step = std::max(out.meta.step, other.meta.step);
  }
  const double n = static_cast<double>(checkpoints.size());
  if (checkpoints.size() > 1)
    for (StoredTensor& t : out.tensors)
      for (double& v : t.values) v /= n;
  out.meta.dev_loss = std::numeric_limits<double>::quiet_NaN();
  return out;
}

void WriteNBestRecord(std::ostream& out, const NBestRecord& r) {
  if (r.text.find_first_of("\t\n") != std::string::npos)
    throw Error("n-best text may not contain tabs or newlines");
  char buf[64];
  out << r.utterance << '\t' << r.rank << '\t';
  std::snprintf(buf, sizeof buf, "%.17g", r.log_likelihood);
  out << buf << '\t';
  std::snprintf(buf, sizeof buf, "%.17g", r.normalized);
  out << buf << '\t' << r.text << '\n';
}

std::vector<NBestRecord> ReadNBestRecords(std::istream& in) {
  std::vector<NBestRecord> records;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (line.back() == '\t') fields.emplace_back();
    if (fields.size() != 5) throw Error("n-best line " + std::to_string(number) + " needs 5 fields");
    NBestRecord r;
    r.utterance = fields[0];
    r.rank = std::stoi(fields[1]);
    r.log_likelihood = std::stod(fields[2]);
    r.normalized = std::stod(fields[3]);
    r.text = fields[4];
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace slt
