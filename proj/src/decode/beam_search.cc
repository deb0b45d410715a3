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

#include "slt/decode/beam_search.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slt/error.h"

namespace slt {

std::vector<int> Hypothesis::Content(int eos) const {
  std::vector<int> out = tokens;
  if (!out.empty() && out.back() == eos) out.pop_back();
  return out;
}

void EnsembleSpec::Validate() const {
  if (members.empty()) throw Error("ensemble has no members");
  for (StepScorer* m : members)
    if (m == nullptr) throw Error("ensemble member is null");
  const int v = members[0]->vocab();
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (members[i]->vocab() != v) {
      throw Error("ensemble member " + std::to_string(i) + " has vocabulary " +
                  std::to_string(members[i]->vocab()) + ", member 0 has " + std::to_string(v));
    }
  }
  if (!weights.empty()) {
    if (weights.size() != members.size()) throw Error("ensemble weight count mismatch");
    double sum = 0;
    for (double w : weights) {
      if (!(w >= 0)) throw Error("ensemble weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("ensemble weights must sum to 1");
  }
  if (state_member >= static_cast<int>(members.size()))
    throw Error("ensemble state member out of range");
}

int EnsembleSpec::vocab() const { return members.at(0)->vocab(); }

StepResult EnsembleStep(const EnsembleSpec& spec, const std::vector<std::vector<int>>& prefixes) {
  spec.Validate();
  const std::size_t k = spec.members.size();
  StepResult out;
  for (std::size_t i = 0; i < k; ++i) {
    StepResult r = spec.members[i]->Step(prefixes);
    const double w = spec.weights.empty() ? 1.0 / k : spec.weights[i];
    if (i == 0) {
      out.probs.assign(r.probs.size(), 0.0);
    } else if (r.probs.size() != out.probs.size()) {
      throw ShapeError("ensemble members returned different distribution sizes");
    }
    if (k == 1) {
      out.probs = r.probs;
    } else {
      for (std::size_t j = 0; j < r.probs.size(); ++j) out.probs[j] += w * r.probs[j];
    }
    if (static_cast<int>(i) == spec.state_member) {
      out.states = std::move(r.states);
      out.state_dim = r.state_dim;
    }
  }
  return out;
}

double LengthNormalize(double log_likelihood, int length, double alpha) {
  if (length < 1) throw Error("length must be >= 1");
  if (alpha == 0.0) return log_likelihood;
  return log_likelihood / std::pow(static_cast<double>(length), alpha);
}

namespace {

// Higher normalized score first, then shorter, then lexicographic.
bool RanksBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.normalized != b.normalized) return a.normalized > b.normalized;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

}  // namespace

NBestList BeamSearch(const EnsembleSpec& spec, const BeamOptions& options) {
  if (options.beam < 1) throw Error("beam must be >= 1");
  if (options.max_len < 1) throw Error("max_len must be >= 1");
  spec.Validate();
  const int vocab = spec.vocab();
  std::vector<char> banned(vocab, 0);
  for (int id : options.banned)
    if (id >= 0 && id < vocab) banned[id] = 1;

  std::vector<Hypothesis> active(1);
  NBestList finished;
  for (int step = 0; step < options.max_len && !active.empty(); ++step) {
    const int width = options.beam - static_cast<int>(finished.size());
    if (width <= 0) break;
    std::vector<std::vector<int>> prefixes;
    prefixes.reserve(active.size());
    for (const Hypothesis& h : active) {
      std::vector<int> p = {options.bos};
      p.insert(p.end(), h.tokens.begin(), h.tokens.end());
      prefixes.push_back(std::move(p));
    }
    const StepResult r = EnsembleStep(spec, prefixes);
    if (r.probs.size() != active.size() * vocab)
      throw ShapeError("scorer returned a distribution of the wrong size");

    // All expansions of the beam at once: score[row * vocab + token].
    const double minus_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> scores(r.probs.size(), minus_inf);
    std::vector<int> candidates;
    candidates.reserve(scores.size());
    for (std::size_t row = 0; row < active.size(); ++row) {
      for (int v = 0; v < vocab; ++v) {
        const double p = r.probs[row * vocab + v];
        if (banned[v] || !(p > 0.0)) continue;
        scores[row * vocab + v] = active[row].log_likelihood + std::log(p);
        candidates.push_back(static_cast<int>(row * vocab + v));
      }
    }
    auto better = [&](int a, int b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      const auto& ta = active[a / vocab].tokens;
      const auto& tb = active[b / vocab].tokens;
      if (ta != tb) return ta < tb;
      return a % vocab < b % vocab;
    };
    const std::size_t keep = std::min<std::size_t>(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(), better);

    std::vector<Hypothesis> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const int row = candidates[c] / vocab;
      const int token = candidates[c] % vocab;
      Hypothesis h = active[row];
      h.tokens.push_back(token);
      h.step_log_probs.push_back(std::log(r.probs[static_cast<std::size_t>(candidates[c])]));
      h.log_likelihood = scores[candidates[c]];
      if (!r.states.empty()) {
        h.state_dim = r.state_dim;
        h.states.insert(h.states.end(), r.states.begin() + static_cast<long>(row) * r.state_dim,
                        r.states.begin() + static_cast<long>(row + 1) * r.state_dim);
      }
      if (token == options.eos) {
        h.finished = true;
        h.normalized = LengthNormalize(h.log_likelihood, static_cast<int>(h.tokens.size()),
                                       options.alpha);
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    active = std::move(next);
  }

  NBestList out = std::move(finished);
  if (out.empty()) {
    for (Hypothesis& h : active) {
      if (h.tokens.empty()) continue;
      h.truncated = true;
      h.normalized =
          LengthNormalize(h.log_likelihood, static_cast<int>(h.tokens.size()), options.alpha);
      out.push_back(std::move(h));
    }
  }
  std::sort(out.begin(), out.end(), RanksBefore);
  if (static_cast<int>(out.size()) > options.beam) out.resize(options.beam);
  return out;
}

}  // namespace slt
