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

#include "slt/decode/coupled.h"

#include "slt/error.h"

namespace slt {

CoupledResult CombineNBest(NBestList asr, std::vector<NBestList> mt,
                           const CoupledOptions& options) {
  if (asr.empty()) throw Error("empty transcript n-best list");
  if (mt.size() != asr.size()) throw Error("need one translation list per transcript");
  CoupledResult r;
  r.scores.resize(asr.size());
  for (std::size_t z = 0; z < asr.size(); ++z) {
    if (mt[z].empty()) throw Error("empty translation n-best list");
    const double zs = options.normalized ? asr[z].normalized : asr[z].log_likelihood;
    for (std::size_t y = 0; y < mt[z].size(); ++y) {
      const double ys = options.normalized ? mt[z][y].normalized : mt[z][y].log_likelihood;
      const double total = zs + ys;
      r.scores[z].push_back(total);
      if (r.best_z < 0 || total > r.best_score) {
        r.best_z = static_cast<int>(z);
        r.best_y = static_cast<int>(y);
        r.best_score = total;
      }
    }
  }
  r.asr = std::move(asr);
  r.mt = std::move(mt);
  return r;
}

CoupledResult CoupledDecode(const std::function<NBestList()>& asr_search,
                            const std::function<NBestList(const Hypothesis&)>& mt_search,
                            const CoupledOptions& options) {
  NBestList asr = asr_search();
  if (asr.empty()) throw Error("empty transcript n-best list");
  std::vector<NBestList> mt;
  mt.reserve(asr.size());
  for (const Hypothesis& z : asr) mt.push_back(mt_search(z));
  return CombineNBest(std::move(asr), std::move(mt), options);
}

}  // namespace slt
