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

#include "slt/eval/metrics.h"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <sstream>

#include "slt/error.h"

namespace slt {

Words SplitOnSpace(const std::string& text) {
  Words words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string JoinWords(const Words& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

namespace {

std::vector<std::vector<int>> EditTable(const Words& ref, const Words& hyp) {
  const std::size_t r = ref.size(), h = hyp.size();
  std::vector<std::vector<int>> d(r + 1, std::vector<int>(h + 1));
  for (std::size_t i = 0; i <= r; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= h; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= r; ++i)
    for (std::size_t j = 1; j <= h; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), d[i - 1][j] + 1,
                          d[i][j - 1] + 1});
  return d;
}

}  // namespace

EditAlignment Align(const Words& ref, const Words& hyp) {
  if (ref.empty()) throw Error("WER needs a nonempty reference");
  const auto d = EditTable(ref, hyp);
  EditAlignment a;
  int i = static_cast<int>(ref.size()), j = static_cast<int>(hyp.size());
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && d[i][j] == d[i - 1][j - 1]) {
      a.pairs.push_back({EditOp::kHit, --i, --j});
      ++a.hits;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      a.pairs.push_back({EditOp::kSubstitution, --i, --j});
      ++a.substitutions;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      a.pairs.push_back({EditOp::kDeletion, --i, -1});
      ++a.deletions;
    } else {
      a.pairs.push_back({EditOp::kInsertion, -1, --j});
      ++a.insertions;
    }
  }
  std::reverse(a.pairs.begin(), a.pairs.end());
  return a;
}

int EditDistance(const Words& ref, const Words& hyp) {
  return EditTable(ref, hyp)[ref.size()][hyp.size()];
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (int n = 0; n < 4; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_length += o.hyp_length;
  ref_length += o.ref_length;
  return *this;
}

BleuStats SentenceBleuStats(const Words& ref, const Words& hyp) {
  BleuStats s;
  s.hyp_length = static_cast<long>(hyp.size());
  s.ref_length = static_cast<long>(ref.size());
  for (int n = 1; n <= 4; ++n) {
    std::map<Words, int> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i)
      ++ref_counts[Words(ref.begin() + i, ref.begin() + i + n)];
    std::map<Words, int> hyp_counts;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i)
      ++hyp_counts[Words(hyp.begin() + i, hyp.begin() + i + n)];
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) s.matches[n - 1] += std::min(count, it->second);
      s.totals[n - 1] += count;
    }
  }
  return s;
}

BleuScore ScoreBleu(const BleuStats& s) {
  BleuScore out;
  out.hyp_length = s.hyp_length;
  out.ref_length = s.ref_length;
  if (s.hyp_length == 0 || s.totals[0] == 0) return out;
  out.precisions[0] = static_cast<double>(s.matches[0]) / s.totals[0];
  for (int n = 1; n < 4; ++n)
    out.precisions[n] = static_cast<double>(s.matches[n] + 1) / (s.totals[n] + 1);
  out.brevity_penalty =
      s.hyp_length < s.ref_length
          ? std::exp(1.0 - static_cast<double>(s.ref_length) / s.hyp_length)
          : 1.0;
  if (out.precisions[0] == 0) return out;
  double log_sum = 0;
  for (double p : out.precisions) log_sum += std::log(p);
  out.bleu = 100.0 * out.brevity_penalty * std::exp(log_sum / 4);
  return out;
}

BleuReport CorpusBleu(const std::vector<ScoredSegment>& segments) {
  if (segments.empty()) throw Error("BLEU needs at least one talk");
  std::map<std::string, std::pair<BleuStats, int>> per_talk;
  for (const auto& seg : segments) {
    auto& [stats, count] = per_talk[seg.talk];
    stats += SentenceBleuStats(SplitOnSpace(seg.reference), SplitOnSpace(seg.hypothesis));
    ++count;
  }
  BleuReport report;
  for (const auto& [talk, entry] : per_talk) {
    if (entry.first.ref_length == 0) throw Error("talk '" + talk + "' has empty references");
    report.talks.push_back({talk, ScoreBleu(entry.first), entry.second});
    report.average += report.talks.back().score.bleu;
  }
  report.average /= static_cast<double>(report.talks.size());
  return report;
}

SegmentationResult MwerSegment(const Words& stream, const std::vector<Words>& references) {
  if (references.empty()) throw Error("segmentation needs at least one reference segment");
  const int n = static_cast<int>(stream.size());
  const int k_count = static_cast<int>(references.size());
  constexpr int kInf = INT_MAX / 2;
  // best[i][j]: minimal cost of aligning references[0..i) with stream[0..j).
  std::vector<std::vector<int>> best(k_count + 1, std::vector<int>(n + 1, kInf));
  std::vector<std::vector<int>> cut(k_count + 1, std::vector<int>(n + 1, -1));
  best[0][0] = 0;
  std::vector<int> column, next;
  for (int i = 1; i <= k_count; ++i) {
    const Words& ref = references[i - 1];
    const int r = static_cast<int>(ref.size());
    for (int start = 0; start <= n; ++start) {
      if (best[i - 1][start] >= kInf) continue;
      // column[q] = distance(stream[start..j), ref[0..q)) for the current j.
      column.resize(r + 1);
      for (int q = 0; q <= r; ++q) column[q] = q;
      for (int j = start;; ++j) {
        const int total = best[i - 1][start] + column[r];
        if (total < best[i][j]) {
          best[i][j] = total;
          cut[i][j] = start;
        }
        if (j == n) break;
        next.assign(r + 1, 0);
        next[0] = column[0] + 1;
        for (int q = 1; q <= r; ++q)
          next[q] = std::min({column[q] + 1, next[q - 1] + 1,
                              column[q - 1] + (stream[j] == ref[q - 1] ? 0 : 1)});
        column.swap(next);
      }
    }
  }
  SegmentationResult out;
  out.errors = best[k_count][n];
  for (const auto& ref : references) out.reference_words += static_cast<int>(ref.size());
  out.segments.resize(k_count);
  int end = n;
  for (int i = k_count; i >= 1; --i) {
    const int start = cut[i][end];
    out.segments[i - 1].assign(stream.begin() + start, stream.begin() + end);
    end = start;
  }
  return out;
}

}  // namespace slt
