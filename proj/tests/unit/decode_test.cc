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

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "slt/decode/averaging.h"
#include "slt/decode/beam_search.h"
#include "slt/decode/coupled.h"
#include "slt/decode/model_scorers.h"
#include "slt/error.h"

namespace slt {
namespace {

// Prefix-dependent random distributions, reproducible from (seed, prefix).
class ToyScorer : public StepScorer {
 public:
  ToyScorer(int vocab, std::uint64_t seed, double peak = 1.0)
      : vocab_(vocab), seed_(seed), peak_(peak) {}
  int vocab() const override { return vocab_; }
  StepResult Step(const std::vector<std::vector<int>>& prefixes) override {
    StepResult r;
    for (const auto& p : prefixes) {
      std::uint64_t h = seed_;
      for (int t : p) h = h * 1000003u + static_cast<std::uint64_t>(t + 7);
      std::mt19937_64 rng(h);
      std::exponential_distribution<double> dist(1.0);
      std::vector<double> w(vocab_);
      double sum = 0;
      for (double& x : w) sum += (x = std::pow(dist(rng), peak_));
      for (double x : w) r.probs.push_back(x / sum);
      calls_.push_back(p);
    }
    return r;
  }
  double Prob(const std::vector<int>& prefix, int token) {
    return Step({prefix}).probs[token];
  }
  std::vector<std::vector<int>> calls_;

 private:
  int vocab_;
  std::uint64_t seed_;
  double peak_;
};

// Always puts all mass on `sequence[t]` at step t, then eos.
class DeterministicScorer : public StepScorer {
 public:
  explicit DeterministicScorer(std::vector<int> sequence) : sequence_(std::move(sequence)) {}
  int vocab() const override { return 10; }
  StepResult Step(const std::vector<std::vector<int>>& prefixes) override {
    StepResult r;
    r.probs.assign(prefixes.size() * 10, 0.0);
    for (std::size_t i = 0; i < prefixes.size(); ++i) {
      const std::size_t t = prefixes[i].size() - 1;
      r.probs[i * 10 + (t < sequence_.size() ? sequence_[t] : kEosId)] = 1.0;
    }
    return r;
  }

 private:
  std::vector<int> sequence_;
};

class FixedScorer : public StepScorer {
 public:
  explicit FixedScorer(std::vector<double> probs) : probs_(std::move(probs)) {}
  int vocab() const override { return static_cast<int>(probs_.size()); }
  StepResult Step(const std::vector<std::vector<int>>& prefixes) override {
    StepResult r;
    for (std::size_t i = 0; i < prefixes.size(); ++i)
      r.probs.insert(r.probs.end(), probs_.begin(), probs_.end());
    return r;
  }

 private:
  std::vector<double> probs_;
};

BeamOptions ToyOptions(int beam, int max_len, int eos) {
  BeamOptions o;
  o.beam = beam;
  o.max_len = max_len;
  o.alpha = 0.0;
  o.bos = 99;
  o.eos = eos;
  o.banned = {};
  return o;
}

TEST(LengthNormalizeTest, Examples) {
  EXPECT_DOUBLE_EQ(LengthNormalize(-10, 5, 1), -2);
  EXPECT_DOUBLE_EQ(LengthNormalize(-10, 5, 0), -10);
  const double shorter = LengthNormalize(-6, 4, 0.3), longer = LengthNormalize(-6, 8, 0.3);
  EXPECT_NEAR(shorter, -6 / std::pow(4.0, 0.3), 1e-12);
  EXPECT_NEAR(shorter, -3.96, 0.01);
  EXPECT_NEAR(longer, -3.22, 0.01);
  EXPECT_GT(longer, shorter);
  EXPECT_THROW(LengthNormalize(-1, 0, 1), Error);
}

TEST(BeamSearchTest, DeterministicScorer) {
  DeterministicScorer scorer({5, 7, 4});
  EnsembleSpec spec{{&scorer}};
  BeamOptions o;
  o.beam = 3;
  o.max_len = 10;
  NBestList out = BeamSearch(spec, o);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].tokens, (std::vector<int>{5, 7, 4, kEosId}));
  EXPECT_EQ(out[0].log_likelihood, 0.0);
  EXPECT_TRUE(out[0].finished);
  EXPECT_EQ(out[0].Content(), (std::vector<int>{5, 7, 4}));
}

TEST(BeamSearchTest, TruncatesWithoutEos) {
  DeterministicScorer scorer({5, 5, 5, 5, 5, 5});
  EnsembleSpec spec{{&scorer}};
  BeamOptions o;
  o.max_len = 3;
  NBestList out = BeamSearch(spec, o);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].truncated);
  EXPECT_FALSE(out[0].finished);
  EXPECT_EQ(out[0].tokens, (std::vector<int>{5, 5, 5}));
  EXPECT_THROW(BeamSearch(spec, [] { BeamOptions b; b.beam = 0; return b; }()), Error);
  EXPECT_THROW(BeamSearch(spec, [] { BeamOptions b; b.max_len = 0; return b; }()), Error);
}

// Every sequence of at most max_len tokens that ends in eos, best raw score
// first (shorter, then lexicographic, on ties).
std::vector<std::pair<double, std::vector<int>>> Exhaustive(ToyScorer& s, int max_len, int eos) {
  std::vector<std::pair<double, std::vector<int>>> all;
  std::function<void(std::vector<int>, double)> walk = [&](std::vector<int> seq, double ll) {
    if (static_cast<int>(seq.size()) == max_len) return;
    std::vector<int> prefix = {99};
    prefix.insert(prefix.end(), seq.begin(), seq.end());
    for (int v = 0; v < s.vocab(); ++v) {
      std::vector<int> next = seq;
      next.push_back(v);
      const double l = ll + std::log(s.Prob(prefix, v));
      if (v == eos) all.emplace_back(l, next);
      else walk(next, l);
    }
  };
  walk({}, 0.0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    if (a.second.size() != b.second.size()) return a.second.size() < b.second.size();
    return a.second < b.second;
  });
  return all;
}

TEST(BeamSearchTest, FullWidthBeamIsExhaustive) {
  int checked = 0;
  for (int vocab : {2, 3, 4}) {
    for (int max_len : {1, 2, 3, 4}) {
      for (int trial = 0; trial < 6; ++trial) {
        ToyScorer scorer(vocab, 1000 * vocab + 10 * max_len + trial, 2.0);
        const int eos = trial % vocab;
        auto oracle = Exhaustive(scorer, max_len, eos);
        const int beam = static_cast<int>(std::pow(vocab, max_len));
        EnsembleSpec spec{{&scorer}};
        NBestList out = BeamSearch(spec, ToyOptions(beam, max_len, eos));
        ASSERT_FALSE(out.empty());
        EXPECT_EQ(out[0].tokens, oracle[0].second);
        EXPECT_NEAR(out[0].log_likelihood, oracle[0].first, 1e-12);
        // The whole finished set is enumerated, in the same order.
        ASSERT_EQ(out.size(), oracle.size());
        for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].tokens, oracle[i].second);
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 72);
}

TEST(BeamSearchTest, GreedyIsBeamOne) {
  for (int trial = 0; trial < 20; ++trial) {
    ToyScorer scorer(6, 77 + trial, 3.0);
    std::vector<int> seq;
    double ll = 0;
    for (int t = 0; t < 8; ++t) {
      std::vector<int> prefix = {99};
      prefix.insert(prefix.end(), seq.begin(), seq.end());
      StepResult r = scorer.Step({prefix});
      const int best = static_cast<int>(std::max_element(r.probs.begin(), r.probs.end()) -
                                        r.probs.begin());
      seq.push_back(best);
      ll += std::log(r.probs[best]);
      if (best == 0) break;
    }
    EnsembleSpec spec{{&scorer}};
    NBestList out = BeamSearch(spec, ToyOptions(1, 8, 0));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].tokens, seq);
    EXPECT_NEAR(out[0].log_likelihood, ll, 1e-12);
  }
}

TEST(BeamSearchTest, ScoresAreSumsOfLoggedSteps) {
  for (int trial = 0; trial < 10; ++trial) {
    ToyScorer scorer(7, 500 + trial, 1.5);
    BeamOptions o = ToyOptions(4, 6, 1);
    o.alpha = 0.7;
    EnsembleSpec spec{{&scorer}};
    for (const Hypothesis& h : BeamSearch(spec, o)) {
      ASSERT_EQ(h.step_log_probs.size(), h.tokens.size());
      double sum = 0;
      std::vector<int> prefix = {99};
      for (std::size_t t = 0; t < h.tokens.size(); ++t) {
        sum += h.step_log_probs[t];
        EXPECT_NEAR(h.step_log_probs[t], std::log(scorer.Prob(prefix, h.tokens[t])), 1e-12);
        prefix.push_back(h.tokens[t]);
      }
      EXPECT_NEAR(h.log_likelihood, sum, 1e-6);
      EXPECT_LE(h.log_likelihood, 0.0);
      EXPECT_NEAR(h.normalized, LengthNormalize(sum, static_cast<int>(h.tokens.size()), 0.7),
                  1e-9);
    }
  }
}

TEST(BeamSearchTest, SearchIsBatchedPerStep) {
  ToyScorer scorer(5, 3, 1.0);
  struct Counting : StepScorer {
    ToyScorer* inner;
    int calls = 0;
    int vocab() const override { return inner->vocab(); }
    StepResult Step(const std::vector<std::vector<int>>& p) override {
      ++calls;
      return inner->Step(p);
    }
  } counting;
  counting.inner = &scorer;
  EnsembleSpec spec{{&counting}};
  NBestList out = BeamSearch(spec, ToyOptions(4, 5, 0));
  int longest = 0;
  for (const auto& h : out) longest = std::max(longest, static_cast<int>(h.tokens.size()));
  EXPECT_LE(counting.calls, 5);
  EXPECT_GE(counting.calls, longest);
}

// Not asserted: a wider beam is not guaranteed to find a better best.
TEST(BeamSearchTest, WiderBeamUsuallyScoresHigher) {
  int counterexamples = 0;
  for (int trial = 0; trial < 50; ++trial) {
    ToyScorer scorer(6, 9000 + trial, 2.0);
    EnsembleSpec spec{{&scorer}};
    const double one = BeamSearch(spec, ToyOptions(1, 6, 0))[0].normalized;
    const double five = BeamSearch(spec, ToyOptions(5, 6, 0))[0].normalized;
    if (five < one) ++counterexamples;
  }
  RecordProperty("beam_monotonicity_counterexamples", counterexamples);
  std::printf("beam 5 < beam 1 on %d of 50 random scorers\n", counterexamples);
}

TEST(EnsembleTest, AveragesProbabilities) {
  FixedScorer a({1.0, 0.0}), b({0.0, 1.0});
  EnsembleSpec both{{&a, &b}};
  StepResult r = EnsembleStep(both, {{0}});
  EXPECT_EQ(r.probs, (std::vector<double>{0.5, 0.5}));

  FixedScorer c({0.2, 0.3, 0.5}), d({0.6, 0.1, 0.3});
  EnsembleSpec weighted{{&c, &d}, {1.0, 0.0}};
  EXPECT_EQ(EnsembleStep(weighted, {{0}}).probs, (std::vector<double>{0.2, 0.3, 0.5}));

  ToyScorer t(9, 4);
  for (int k : {2, 3, 5}) {
    EnsembleSpec same;
    for (int i = 0; i < k; ++i) same.members.push_back(&t);
    StepResult avg = EnsembleStep(same, {{1, 4, 5}, {1, 2, 2}});
    StepResult one = t.Step({{1, 4, 5}, {1, 2, 2}});
    double total = 0;
    for (std::size_t i = 0; i < one.probs.size(); ++i) {
      EXPECT_NEAR(avg.probs[i], one.probs[i], 1e-7);
      total += avg.probs[i];
    }
    EXPECT_NEAR(total, 2.0, 1e-6);
  }
}

TEST(EnsembleTest, RejectsBadSpecs) {
  FixedScorer a({0.5, 0.5}), b({0.2, 0.3, 0.5});
  EXPECT_THROW(EnsembleStep(EnsembleSpec{{&a, &b}}, {{0}}), Error);
  EXPECT_THROW(EnsembleStep(EnsembleSpec{}, {{0}}), Error);
  EXPECT_THROW(EnsembleStep(EnsembleSpec{{&a, &a}, {0.7, 0.7}}, {{0}}), Error);
  EXPECT_THROW(EnsembleStep(EnsembleSpec{{&a, &a}, {1.5, -0.5}}, {{0}}), Error);
}

TEST(EnsembleTest, IdenticalMembersGiveIdenticalNBest) {
  for (int trial = 0; trial < 5; ++trial) {
    ToyScorer t(8, 40 + trial, 1.5);
    NBestList single = BeamSearch(EnsembleSpec{{&t}}, ToyOptions(4, 7, 2));
    for (int k : {2, 3, 5}) {
      EnsembleSpec spec;
      for (int i = 0; i < k; ++i) spec.members.push_back(&t);
      NBestList out = BeamSearch(spec, ToyOptions(4, 7, 2));
      ASSERT_EQ(out.size(), single.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        EXPECT_EQ(out[i].tokens, single[i].tokens);
        EXPECT_NEAR(out[i].log_likelihood, single[i].log_likelihood, 1e-5);
      }
    }
  }
}

Hypothesis Scored(double ll, std::vector<int> tokens = {}) {
  Hypothesis h;
  h.log_likelihood = h.normalized = ll;
  h.tokens = std::move(tokens);
  return h;
}

TEST(CoupledTest, TwoByTwoMatrix) {
  NBestList z = {Scored(-1), Scored(-2)};
  std::vector<NBestList> y = {{Scored(-3), Scored(-1)}, {Scored(-0.2), Scored(-5)}};
  CoupledResult r = CombineNBest(z, y);
  // Sums: (-4, -2) and (-2.2, -7). (z2, y1) is only the runner-up.
  EXPECT_EQ(r.best_z, 0);
  EXPECT_EQ(r.best_y, 1);
  EXPECT_NEAR(r.best_score, -2.0, 1e-12);
  EXPECT_NEAR(r.scores[1][0], -2.2, 1e-12);
  EXPECT_NEAR(r.scores[0][0], -4.0, 1e-12);
  EXPECT_NEAR(r.scores[1][1], -7.0, 1e-12);
  EXPECT_THROW(CombineNBest({}, {}), Error);
  EXPECT_THROW(CombineNBest(z, {{Scored(-1)}, {}}), Error);
}

TEST(CoupledTest, NormalizedFlagUsesNormalizedScores) {
  NBestList z = {Scored(-1), Scored(-2)};
  z[0].normalized = -10;
  std::vector<NBestList> y = {{Scored(-1)}, {Scored(-1)}};
  EXPECT_EQ(CombineNBest(z, y).best_z, 0);
  EXPECT_EQ(CombineNBest(z, y, {.normalized = true}).best_z, 1);
}

TEST(CoupledTest, MatchesCrossProductOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-8.0, 0.0);
  std::uniform_int_distribution<int> size(1, 7);
  for (int trial = 0; trial < 200; ++trial) {
    NBestList z;
    std::vector<NBestList> y;
    const int nz = size(rng);
    for (int i = 0; i < nz; ++i) {
      z.push_back(Scored(u(rng)));
      y.emplace_back();
      const int ny = std::min(size(rng), 50 / nz);
      for (int j = 0; j < std::max(ny, 1); ++j) y.back().push_back(Scored(u(rng)));
    }
    double best = -1e300;
    int bz = -1, by = -1;
    for (int i = 0; i < nz; ++i)
      for (int j = 0; j < static_cast<int>(y[i].size()); ++j)
        if (z[i].log_likelihood + y[i][j].log_likelihood > best) {
          best = z[i].log_likelihood + y[i][j].log_likelihood;
          bz = i;
          by = j;
        }
    CoupledResult r = CombineNBest(z, y);
    EXPECT_EQ(r.best_z, bz);
    EXPECT_EQ(r.best_y, by);
    EXPECT_GE(r.best_score, z[0].log_likelihood + y[0][0].log_likelihood);
  }
}

TEST(CoupledTest, SingleTranscriptIsTheCascade) {
  ToyScorer asr(6, 1, 2.0);
  int translated = 0;
  auto asr_search = [&] { return BeamSearch(EnsembleSpec{{&asr}}, ToyOptions(1, 5, 0)); };
  auto mt_search = [&](const Hypothesis& z) {
    ++translated;
    ToyScorer mt(6, 100 + z.tokens.size(), 2.0);
    return BeamSearch(EnsembleSpec{{&mt}}, ToyOptions(5, 5, 0));
  };
  CoupledResult r = CoupledDecode(asr_search, mt_search);
  EXPECT_EQ(translated, 1);
  NBestList z = asr_search();
  NBestList y = mt_search(z[0]);
  EXPECT_EQ(r.transcript().tokens, z[0].tokens);
  EXPECT_EQ(r.translation().tokens, y[0].tokens);
}

TEST(AveragingTest, MeansAndMismatches) {
  Checkpoint a;
  a.meta.kind = ModelKind::kMt;
  a.meta.step = 10;
  a.tensors = {{"w", {2, 2}, {0, 0, 0, 0}}, {"b", {3}, {0, 0, 0}}};
  Checkpoint b = a;
  b.meta.step = 20;
  for (auto& t : b.tensors)
    for (double& v : t.values) v = 2;
  Checkpoint avg = AverageCheckpoints({a, b});
  for (const auto& t : avg.tensors)
    for (double v : t.values) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(avg.meta.step, 20);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  Checkpoint r = a;
  for (auto& t : r.tensors)
    for (double& v : t.values) v = dist(rng);
  for (int k : {1, 2, 3, 7, 10}) {
    Checkpoint m = AverageCheckpoints(std::vector<Checkpoint>(k, r));
    for (std::size_t i = 0; i < r.tensors.size(); ++i)
      for (std::size_t j = 0; j < r.tensors[i].values.size(); ++j)
        EXPECT_NEAR(m.tensors[i].values[j], r.tensors[i].values[j], 1e-7);
  }

  Checkpoint c = a;
  c.meta.mt.d_ff = 99;
  try {
    AverageCheckpoints({a, c});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("mt.d_ff"), std::string::npos) << e.what();
  }
  Checkpoint d = a;
  d.tensors[1].shape = {1, 3};
  EXPECT_THROW(AverageCheckpoints({a, d}), Error);
  EXPECT_THROW(AverageCheckpoints({}), Error);
}

TEST(NBestIoTest, RoundTrip) {
  std::stringstream ss;
  WriteNBestRecord(ss, {"utt-1", 1, -1.25, -0.3125, "hello world"});
  WriteNBestRecord(ss, {"utt-1", 2, -3.0 / 7, -1e-20, ""});
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "utt-1\t1\t-1.25\t-0.3125\thello world");
  auto back = ReadNBestRecords(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].log_likelihood, -3.0 / 7);
  EXPECT_EQ(back[1].text, "");
  EXPECT_EQ(back[0].rank, 1);
  std::stringstream bad;
  EXPECT_THROW(WriteNBestRecord(bad, {"u", 1, 0, 0, "a\tb"}), Error);
}

TransformerConfig Tiny(int input_dim, int vocab) {
  TransformerConfig c;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.d_model = 16;
  c.d_ff = 32;
  c.heads = 2;
  c.input_dim = input_dim;
  c.target_vocab = vocab;
  return c;
}

FeatureMatrix RandomFeatures(int frames, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  FeatureMatrix f;
  f.frames = frames;
  f.dim = dim;
  f.normalized = true;
  f.data.resize(static_cast<std::size_t>(frames) * dim);
  for (double& v : f.data) v = dist(rng);
  return f;
}

TEST(ModelScorerTest, SearchStatesEqualForcedStates) {
  JointModel<double> model(Tiny(8, 12), Tiny(0, 14), 0.5, 5);
  for (int seed = 0; seed < 4; ++seed) {
    FeatureMatrix f = RandomFeatures(20 + seed, 8, seed);
    auto scorer = AsrScorer(model.asr(), f);
    BeamOptions o;
    o.beam = 1;
    o.max_len = 6;
    NBestList greedy = BeamSearch(EnsembleSpec{{&scorer}, {}, 0}, o);
    ASSERT_EQ(greedy.size(), 1u);
    const Hypothesis& h = greedy[0];
    ASSERT_EQ(h.states.size(), h.tokens.size() * 16);
    Tensor<double> forced = model.ForcedContinuation(f, h.Content());
    EXPECT_EQ(forced.dim(0), static_cast<int>(h.Content().size()) + 1);
    for (std::size_t i = 0; i < h.states.size(); ++i)
      EXPECT_NEAR(h.states[i], forced.data()[i], 1e-5);

    // The translation side accepts the states directly.
    auto mt = MtScorer(model.mt(), BridgeSource(forced));
    NBestList y = BeamSearch(EnsembleSpec{{&mt}}, o);
    EXPECT_FALSE(y.empty());
  }
}

TEST(ModelScorerTest, CopiesOfOneModelReproduceItsNBest) {
  MtModel<float> model(Tiny(20, 20), 8);
  auto source = MtSource<float>::FromTokens({{4, 9, 12, 6}});
  auto scorer = MtScorer(model, source);
  BeamOptions o;
  o.beam = 5;
  o.max_len = 7;
  o.alpha = 1.0;
  NBestList single = BeamSearch(EnsembleSpec{{&scorer}}, o);
  for (int k : {2, 3, 5}) {
    std::vector<DecoderScorer<float>> copies(k, MtScorer(model, source));
    EnsembleSpec spec;
    for (auto& c : copies) spec.members.push_back(&c);
    NBestList out = BeamSearch(spec, o);
    ASSERT_EQ(out.size(), single.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out[i].tokens, single[i].tokens);
      EXPECT_NEAR(out[i].log_likelihood, single[i].log_likelihood, 1e-5);
    }
  }
}

}  // namespace
}  // namespace slt
