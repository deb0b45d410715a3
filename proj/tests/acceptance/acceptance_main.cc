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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance [--run-dir DIR] [--only N ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slt/decode/averaging.h"
#include "slt/decode/model_scorers.h"
#include "slt/error.h"
#include "slt/harness/run.h"
#include "slt/numerics/grad_check.h"

namespace fs = std::filesystem;
using namespace slt;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

Tensor<double> Random(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> data(ShapeSize(shape));
  for (double& v : data) v = dist(rng);
  return Tensor<double>(std::move(shape), std::move(data));
}

FeatureMatrix RandomFeatures(int frames, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  FeatureMatrix f;
  f.frames = frames;
  f.dim = dim;
  f.normalized = true;
  f.kind = FeatureKind::kLogMelDeltas;
  f.data.resize(static_cast<std::size_t>(frames) * dim);
  for (double& v : f.data) v = dist(rng);
  return f;
}

TransformerConfig TinyConfig(int input_dim, int vocab) {
  TransformerConfig c;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.d_model = 8;
  c.d_ff = 12;
  c.heads = 2;
  c.dropout = 0.0;
  c.label_smoothing = 0.1;
  c.input_dim = input_dim;
  c.target_vocab = vocab;
  return c;
}

// ---------------------------------------------------------------------------
// 1. Gradient suite

Outcome GradientSuite() {
  const auto start = Clock::now();
  const double tol = 1e-4;
  double worst = 0;
  std::string worst_name;
  int checks = 0;
  auto record = [&](const std::string& name, const GradCheckResult& r) {
    ++checks;
    if (r.max_relative_error > worst) {
      worst = r.max_relative_error;
      worst_name = name;
    }
  };

  using TensorD = Tensor<double>;
  for (int point = 0; point < 20; ++point) {
    std::mt19937_64 rng(5000 + point);
    const TensorD weights = Random({3, 4, 6}, rng);
    auto contract = [&](const TensorD& out) {
      std::vector<double> w(weights.data().begin(), weights.data().begin() + out.size());
      return ops::Sum(ops::Mul(out, TensorD(out.shape(), w)));
    };
    const TensorD other = Random({3, 4, 6}, rng), gain = Random({6}, rng), bias = Random({6}, rng);
    const TensorD w2 = Random({6, 5}, rng), b2 = Random({5}, rng);
    const TensorD k = Random({6, 4, 3}, rng), v = Random({6, 4, 2}, rng);
    ops::AttentionMask mask = ops::AttentionMask::Open(3, 4, 4);
    for (int q = 0; q < 4; ++q)
      for (int kk = q + 1; kk < 4; ++kk) mask.allowed[(2 * 4 + q) * 4 + kk] = 0;
    std::uniform_int_distribution<int> id7(0, 6), id6(0, 5);
    std::vector<int> ids(6), targets(12);
    for (int& i : ids) i = id7(rng);
    for (int& i : targets) i = id6(rng);
    targets[5] = -1;

    const std::vector<std::pair<std::string, std::pair<std::function<TensorD(const TensorD&)>, Shape>>>
        cases = {
            {"add", {[&](const TensorD& x) { return contract(ops::Add(x, other)); }, {3, 4, 6}}},
            {"sub", {[&](const TensorD& x) { return contract(ops::Sub(other, x)); }, {3, 4, 6}}},
            {"mul", {[&](const TensorD& x) { return contract(ops::Mul(x, other)); }, {3, 4, 6}}},
            {"scale", {[&](const TensorD& x) { return contract(ops::Scale(x, -0.6)); }, {3, 4, 6}}},
            {"relu", {[&](const TensorD& x) { return contract(ops::Relu(x)); }, {3, 4, 6}}},
            {"mean", {[&](const TensorD& x) { return ops::Mean(ops::Mul(x, x)); }, {3, 4, 6}}},
            {"reshape", {[&](const TensorD& x) { return contract(ops::Reshape(x, {12, 6})); }, {3, 4, 6}}},
            {"matmul", {[&](const TensorD& x) { return contract(ops::MatMul(x, w2)); }, {4, 6}}},
            {"linear.x", {[&](const TensorD& x) { return contract(ops::Linear(x, w2, b2)); }, {3, 4, 6}}},
            {"linear.w", {[&](const TensorD& x) { return contract(ops::Linear(other, x, b2)); }, {6, 5}}},
            {"linear.b", {[&](const TensorD& x) { return contract(ops::Linear(other, w2, x)); }, {5}}},
            {"softmax.last", {[&](const TensorD& x) { return contract(ops::Softmax(x, -1)); }, {3, 4, 6}}},
            {"softmax.mid", {[&](const TensorD& x) { return contract(ops::Softmax(x, 1)); }, {3, 4, 6}}},
            {"layernorm.x", {[&](const TensorD& x) { return contract(ops::LayerNorm(x, gain, bias, 1e-5)); }, {3, 4, 6}}},
            {"layernorm.g", {[&](const TensorD& x) { return contract(ops::LayerNorm(other, x, bias, 1e-5)); }, {6}}},
            {"layernorm.b", {[&](const TensorD& x) { return contract(ops::LayerNorm(other, gain, x, 1e-5)); }, {6}}},
            {"attention.q", {[&](const TensorD& x) { return contract(ops::ScaledDotAttention(x, k, v, &mask)); }, {6, 4, 3}}},
            {"attention.k", {[&](const TensorD& x) { return contract(ops::ScaledDotAttention(k, x, v, &mask)); }, {6, 4, 3}}},
            {"attention.v", {[&](const TensorD& x) { return contract(ops::ScaledDotAttention(k, k, x, &mask)); }, {6, 4, 2}}},
            {"split_heads", {[&](const TensorD& x) { return contract(ops::SplitHeads(x, 3)); }, {2, 4, 6}}},
            {"merge_heads", {[&](const TensorD& x) { return contract(ops::MergeHeads(x, 3)); }, {6, 2, 4}}},
            {"embedding", {[&](const TensorD& x) { return contract(ops::Embedding<double>(x, ids, {2, 3})); }, {7, 4}}},
            {"unfold", {[&](const TensorD& x) { return contract(ops::Unfold(x, 3, 2, 1)); }, {2, 5, 3}}},
            {"cross_entropy", {[&](const TensorD& x) { return ops::CrossEntropy<double>(x, targets, 0.1, -1); }, {12, 6}}},
        };
    for (const auto& [name, c] : cases) record(name, GradCheck(c.first, Random(c.second, rng), 1e-5));
  }

  // Full joint loss with respect to every parameter tensor.
  std::mt19937_64 rng(77);
  std::vector<FeatureMatrix> feats = {RandomFeatures(14, 8, rng), RandomFeatures(19, 8, rng)};
  const std::vector<const FeatureMatrix*> batch = {&feats[0], &feats[1]};
  JointModel<double> model(TinyConfig(8, 12), TinyConfig(0, 11), 0.5, 21);
  const std::vector<std::vector<int>> transcripts = {{4, 5}, {7, 8, 9}};
  const std::vector<std::vector<int>> targets = {{6, 5, 4}, {10}};
  auto loss = [&] { return model.Forward(batch, transcripts, targets).total; };
  for (const auto& [name, p] : model.Parameters())
    record("joint:" + name, GradCheckParameter(loss, p, 1e-5, 24));

  const double seconds = Seconds(start);
  return {worst < tol && seconds < 60.0,
          std::to_string(checks) + " checks, max rel err " + Fmt(worst, 8) + " (" + worst_name +
              "), " + Fmt(seconds, 1) + " s"};
}

// ---------------------------------------------------------------------------
// Shared trained run for criteria 2, 4, 8 and 9.

struct TrainedRun {
  ExperimentConfig config;
  RunLayout layout;
  PipelineSummary summary;
  double seconds = 0;
  std::optional<std::string> error;
};

TrainedRun& SharedRun(const std::string& dir) {
  static std::optional<TrainedRun> run;
  if (run) return *run;
  run.emplace();
  run->layout.root = dir;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto start = Clock::now();
  try {
    run->summary = RunPipeline(run->config, run->layout, [](const std::string& line) {
      std::cerr << "  [pipeline] " << line << std::endl;
    });
  } catch (const std::exception& e) {
    run->error = e.what();
  }
  run->seconds = Seconds(start);
  return *run;
}

// Sum of log-probabilities of `h.tokens` under teacher forcing.
template <typename T>
double TeacherForced(const TransformerDecoder<T>& decoder, const EncoderOutput<T>& memory,
                     const Hypothesis& h) {
  std::vector<int> input = {kBosId};
  input.insert(input.end(), h.tokens.begin(), h.tokens.end() - (h.tokens.empty() ? 0 : 1));
  const int n = static_cast<int>(h.tokens.size());
  if (n == 0) return 0.0;
  const DecoderOutput<T> out = decoder({input}, {n}, memory, ForwardContext{});
  const int vocab = decoder.vocab();
  const auto logits = out.logits.data();
  double total = 0;
  for (int t = 0; t < n; ++t) {
    const T* z = logits.data() + static_cast<std::size_t>(t) * vocab;
    double m = z[0];
    for (int v = 1; v < vocab; ++v) m = std::max(m, static_cast<double>(z[v]));
    double s = 0;
    for (int v = 0; v < vocab; ++v) s += std::exp(z[v] - m);
    total += z[h.tokens[t]] - m - std::log(s);
  }
  return total;
}

// ---------------------------------------------------------------------------
// 2. Coupled selection against the cross-product oracle

Outcome CoupledOracle(const std::string& run_dir) {
  TrainedRun& run = SharedRun(run_dir);
  if (run.error) return {false, "pipeline failed: " + *run.error};
  const Vocabularies vocabs = LoadVocabularies(run.layout.VocabDir());
  const Manifest manifest = ReadManifest(run.layout.Manifest(run.config));
  std::vector<Example> examples = LoadExamples(manifest, "test", vocabs, run.config.num_mels);
  const std::vector<Example> dev = LoadExamples(manifest, "dev", vocabs, run.config.num_mels);
  examples.insert(examples.end(), dev.begin(), dev.end());

  DecodingConfig options = run.config.decoding;
  options.asr_beam = 10;
  options.mt_beam = 5;
  const Recipe cascade = Recipe::Parse("[Ext-ASR]=>[Ext-MT]");
  const Recipe joint = Recipe::Parse("[Joint-ASR]=>[Joint-MT]");
  const ModelSet models = LoadModelsFor({cascade, joint}, run.layout.Models(), run.config, vocabs);

  int agree = 0, total = 0, pairs = 0;
  double worst_rescore = 0;
  for (const Recipe& recipe : {cascade, joint}) {
    for (const Example& ex : examples) {
      const CoupledResult r = DecodeUtterance(recipe, models, ex.features, options);
      // Brute force over the cross product; the first pair in (z, y) order
      // wins ties.
      int bz = -1, by = -1;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t z = 0; z < r.asr.size(); ++z)
        for (std::size_t y = 0; y < r.mt[z].size(); ++y) {
          const double s = r.asr[z].log_likelihood + r.mt[z][y].log_likelihood;
          ++pairs;
          if (s > best) {
            best = s;
            bz = static_cast<int>(z);
            by = static_cast<int>(y);
          }
        }
      ++total;
      if (bz == r.best_z && by == r.best_y) ++agree;

      // The list scores are the models' own teacher-forced scores.
      const AsrModel<float>& asr = recipe.ext_asr ? *models.ext_asr : models.joint->asr();
      const EncoderOutput<float> memory = asr.Encode({&ex.features});
      for (std::size_t z = 0; z < r.asr.size(); ++z) {
        worst_rescore = std::max(
            worst_rescore, std::abs(TeacherForced(asr.decoder(), memory, r.asr[z]) -
                                    r.asr[z].log_likelihood));
        const std::vector<int> content = r.asr[z].Content();
        const EncoderOutput<float> source =
            recipe.ext_mt
                ? models.ext_mt->Encode(MtSource<float>::FromTokens({content}))
                : models.joint->mt().Encode(
                      BridgeSource(models.joint->ForcedContinuation(ex.features, content)));
        const auto& mt_decoder = recipe.ext_mt ? models.ext_mt->decoder() : models.joint->mt().decoder();
        for (const Hypothesis& y : r.mt[z])
          worst_rescore =
              std::max(worst_rescore, std::abs(TeacherForced(mt_decoder, source, y) - y.log_likelihood));
      }
    }
  }
  const bool pass = total >= 100 && agree == total && worst_rescore < 1e-3;
  return {pass, std::to_string(agree) + "/" + std::to_string(total) +
                    " utterances agree (beams 10x5, " + std::to_string(pairs) +
                    " pairs), max rescoring gap " + Fmt(worst_rescore, 6)};
}

// ---------------------------------------------------------------------------
// 3. Exhaustive beam equivalence

// Every prefix gets its own random next-token distribution.
class PrefixHashScorer : public StepScorer {
 public:
  PrefixHashScorer(int vocab, std::uint64_t seed) : vocab_(vocab), seed_(seed) {}
  int vocab() const override { return vocab_; }
  StepResult Step(const std::vector<std::vector<int>>& prefixes) override {
    StepResult r;
    for (const auto& p : prefixes) {
      const std::vector<double> d = Distribution(p);
      r.probs.insert(r.probs.end(), d.begin(), d.end());
    }
    return r;
  }
  std::vector<double> Distribution(const std::vector<int>& prefix) const {
    std::uint64_t h = seed_;
    for (int t : prefix) h = (h ^ static_cast<std::uint64_t>(t + 11)) * 0x100000001b3ULL;
    std::mt19937_64 rng(h);
    std::gamma_distribution<double> g(0.7, 1.0);
    std::vector<double> w(vocab_);
    double sum = 0;
    for (double& x : w) sum += (x = g(rng) + 1e-12);
    for (double& x : w) x /= sum;
    return w;
  }

 private:
  int vocab_;
  std::uint64_t seed_;
};

Outcome ExhaustiveBeam() {
  const int vocab = 4, max_len = 4, bos = 0, eos = 1;
  const int beam = 256;  // |V|^max_len
  int agree = 0, total = 0;
  double worst = 0;
  for (int trial = 0; trial < 60; ++trial) {
    PrefixHashScorer scorer(vocab, 900 + trial);
    // Every finished sequence: up to max_len - 1 content tokens then eos.
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_seq;
    std::function<void(std::vector<int>&, double)> walk = [&](std::vector<int>& prefix,
                                                              double score) {
      const std::vector<double> p = scorer.Distribution(prefix);
      const int generated = static_cast<int>(prefix.size()) - 1;
      const double finished = score + std::log(p[eos]);
      if (finished > best) {
        best = finished;
        best_seq.assign(prefix.begin() + 1, prefix.end());
        best_seq.push_back(eos);
      }
      if (generated + 1 >= max_len) return;
      for (int t = 0; t < vocab; ++t) {
        if (t == bos || t == eos) continue;
        prefix.push_back(t);
        walk(prefix, score + std::log(p[t]));
        prefix.pop_back();
      }
    };
    std::vector<int> root = {bos};
    walk(root, 0.0);

    EnsembleSpec spec{{&scorer}, {}, -1};
    BeamOptions options;
    options.beam = beam;
    options.max_len = max_len;
    options.alpha = 0.0;
    options.bos = bos;
    options.eos = eos;
    options.banned = {bos};
    const NBestList list = BeamSearch(spec, options);
    ++total;
    if (!list.empty() && list[0].tokens == best_seq) ++agree;
    if (!list.empty()) worst = std::max(worst, std::abs(list[0].log_likelihood - best));
  }
  return {total >= 50 && agree == total && worst < 1e-9,
          std::to_string(agree) + "/" + std::to_string(total) + " scorers (V=4, max_len=4, beam=256)"};
}

// ---------------------------------------------------------------------------
// 4. Ensemble identity

Outcome EnsembleIdentity(const std::string& run_dir) {
  TrainedRun& run = SharedRun(run_dir);
  if (run.error) return {false, "pipeline failed: " + *run.error};
  const Vocabularies vocabs = LoadVocabularies(run.layout.VocabDir());
  const Manifest manifest = ReadManifest(run.layout.Manifest(run.config));
  const std::vector<Example> examples = LoadExamples(manifest, "test", vocabs, run.config.num_mels);
  const AsrModel<float> asr = LoadAsrModel(run.layout.Model(TrainModel::kExtAsr), run.config, vocabs);
  const MtModel<float> mt = LoadMtModel(run.layout.Model(TrainModel::kExtMt), run.config, vocabs);

  double worst = 0;
  int token_mismatch = 0, lists = 0;
  BeamOptions options;
  options.beam = 5;
  options.max_len = 30;
  for (std::size_t i = 0; i < 20; ++i) {
    const Example& ex = examples[i];
    auto check = [&](const std::function<std::unique_ptr<StepScorer>()>& make) {
      auto single = make();
      EnsembleSpec one{{single.get()}, {}, -1};
      const NBestList reference = BeamSearch(one, options);
      for (int k : {2, 3, 5}) {
        std::vector<std::unique_ptr<StepScorer>> copies;
        EnsembleSpec spec;
        for (int c = 0; c < k; ++c) {
          copies.push_back(make());
          spec.members.push_back(copies.back().get());
        }
        const NBestList list = BeamSearch(spec, options);
        ++lists;
        if (list.size() != reference.size()) {
          ++token_mismatch;
          continue;
        }
        for (std::size_t h = 0; h < list.size(); ++h) {
          if (list[h].tokens != reference[h].tokens) ++token_mismatch;
          worst = std::max(worst, std::abs(list[h].log_likelihood - reference[h].log_likelihood));
        }
      }
    };
    check([&] { return std::make_unique<DecoderScorer<float>>(AsrScorer(asr, ex.features)); });
    check([&] {
      return std::make_unique<DecoderScorer<float>>(
          MtScorer(mt, MtSource<float>::FromTokens({ex.transcript})));
    });
  }
  return {token_mismatch == 0 && worst <= 1e-5,
          std::to_string(lists) + " ensemble n-best lists (k=2,3,5), " +
              std::to_string(token_mismatch) + " token mismatches, max score diff " + Fmt(worst, 8)};
}

// ---------------------------------------------------------------------------
// 5. Checkpoint averaging

Outcome CheckpointAveraging() {
  const std::string dir = (fs::temp_directory_path() / "slt_acceptance_ckpt").string();
  fs::remove_all(dir);
  fs::create_directories(dir);
  TransformerConfig asr = TinyConfig(12, 9);
  AsrModel<float> model(asr, 5);
  CheckpointMeta meta;
  meta.kind = ModelKind::kAsr;
  meta.asr = asr;
  const Checkpoint base = CaptureCheckpoint(model.Parameters(), meta);
  SaveCheckpoint(dir + "/base.ckpt", base);

  double worst = 0;
  for (int k : {2, 3, 5, 7}) {
    std::vector<Checkpoint> copies(k, LoadCheckpoint(dir + "/base.ckpt"));
    const Checkpoint avg = AverageCheckpoints(copies);
    for (std::size_t t = 0; t < base.tensors.size(); ++t)
      for (std::size_t i = 0; i < base.tensors[t].values.size(); ++i) {
        const double a = base.tensors[t].values[i], b = avg.tensors[t].values[i];
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      }
  }

  Checkpoint zeros = base, twos = base;
  for (auto& t : zeros.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
  for (auto& t : twos.tensors) std::fill(t.values.begin(), t.values.end(), 2.0);
  const Checkpoint mean = AverageCheckpoints({zeros, twos});
  bool exact_one = true;
  for (const auto& t : mean.tensors)
    for (double v : t.values) exact_one = exact_one && v == 1.0;

  return {worst <= 1e-7 && exact_one,
          "identical copies max rel diff " + Fmt(worst, 10) + ", {0,2} mean exactly 1: " +
              (exact_one ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 6. Metric oracles

int BruteEdit(const Words& r, std::size_t i, const Words& h, std::size_t j) {
  if (i == r.size()) return static_cast<int>(h.size() - j);
  if (j == h.size()) return static_cast<int>(r.size() - i);
  return std::min({BruteEdit(r, i + 1, h, j + 1) + (r[i] == h[j] ? 0 : 1),
                   BruteEdit(r, i + 1, h, j) + 1, BruteEdit(r, i, h, j + 1) + 1});
}

Words RandomWords(std::mt19937_64& rng, int min_len, int max_len) {
  static const char* kWords[] = {"a", "b", "c", "d", "e"};
  std::uniform_int_distribution<int> len(min_len, max_len), word(0, 4);
  Words w(len(rng));
  for (auto& x : w) x = kWords[word(rng)];
  return w;
}

Outcome MetricOracles() {
  std::mt19937_64 rng(31);
  int wer_cases = 0, wer_bad = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Words ref = RandomWords(rng, 1, 5), hyp = RandomWords(rng, 0, 5);
    ++wer_cases;
    const int brute = BruteEdit(ref, 0, hyp, 0);
    if (EditDistance(ref, hyp) != brute || Align(ref, hyp).errors() != brute) ++wer_bad;
  }

  int seg_cases = 0, seg_bad = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> nseg(1, 3);
    const int k = nseg(rng);
    std::vector<Words> refs;
    for (int s = 0; s < k; ++s) refs.push_back(RandomWords(rng, 1, 3));
    const Words stream = RandomWords(rng, 0, 10);
    // Every placement of k - 1 cuts in 0..N.
    int best = std::numeric_limits<int>::max();
    const int n = static_cast<int>(stream.size());
    std::function<void(int, int, int)> place = [&](int seg, int start, int cost) {
      if (seg == k - 1) {
        const Words piece(stream.begin() + start, stream.end());
        best = std::min(best, cost + BruteEdit(refs[seg], 0, piece, 0));
        return;
      }
      for (int end = start; end <= n; ++end) {
        const Words piece(stream.begin() + start, stream.begin() + end);
        place(seg + 1, end, cost + BruteEdit(refs[seg], 0, piece, 0));
      }
    };
    place(0, 0, 0);
    const SegmentationResult r = MwerSegment(stream, refs);
    ++seg_cases;
    int recomputed = 0;
    Words joined;
    for (std::size_t s = 0; s < r.segments.size(); ++s) {
      recomputed += BruteEdit(refs[s], 0, r.segments[s], 0);
      joined.insert(joined.end(), r.segments[s].begin(), r.segments[s].end());
    }
    if (r.errors != best || recomputed != best || joined != stream ||
        static_cast<int>(r.segments.size()) != k)
      ++seg_bad;
  }

  // Hand-evaluated BLEU: p1 = m1/c1, pn = (mn+1)/(cn+1) for n >= 2,
  // BP = exp(1 - r/c) when c < r.
  struct BleuCase {
    std::vector<std::pair<std::string, std::string>> pairs;  // reference, hypothesis
    double expected;
  };
  const std::vector<BleuCase> bleu_cases = {
      // p = 4/5, 4/5, 3/4, 2/3; BP = 1.
      {{{"a b c d", "a b c d e"}}, 75.2121},
      // p = 5/5, 4/5, 2/4, 1/3; BP = exp(1 - 6/5).
      {{{"the cat sat on the mat", "the cat on the mat"}}, 49.4739},
      // Two segments, one talk: p = 5/6, 3/5, 2/3, 1/1; BP = exp(1 - 7/6).
      {{{"a b c", "a b c"}, {"d e f g", "d x f"}}, 64.3187},
      // Clipped unigrams; higher orders empty; BP = exp(1 - 4/2).
      {{{"a a a a", "a a"}}, 36.7879},
      // p = 5/5, 1/5, 1/4, 1/3; BP = 1.
      {{{"one two three four five", "five four three two one"}}, 35.9304},
  };
  int bleu_bad = 0;
  std::string bleu_detail;
  for (const auto& c : bleu_cases) {
    std::vector<ScoredSegment> segs;
    for (const auto& [ref, hyp] : c.pairs) segs.push_back({"talk", ref, hyp});
    const double got = CorpusBleu(segs).average;
    if (std::abs(got - c.expected) >= 5e-5) {
      ++bleu_bad;
      bleu_detail += " got " + Fmt(got) + " want " + Fmt(c.expected);
    }
  }

  std::vector<ScoredSegment> self;
  for (int i = 0; i < 20; ++i) {
    const std::string s = JoinWords(RandomWords(rng, 1, 8));
    self.push_back({"t" + std::to_string(i % 3), s, s});
  }
  const bool self_bleu = std::abs(CorpusBleu(self).average - 100.0) < 1e-9;
  bool self_wer = true;
  for (const auto& s : self) self_wer = self_wer && Align(SplitOnSpace(s.reference), SplitOnSpace(s.hypothesis)).errors() == 0;

  const bool pass = wer_bad == 0 && seg_bad == 0 && bleu_bad == 0 && self_bleu && self_wer;
  return {pass, "wer " + std::to_string(wer_cases - wer_bad) + "/" + std::to_string(wer_cases) +
                    ", mwer " + std::to_string(seg_cases - seg_bad) + "/" + std::to_string(seg_cases) +
                    ", bleu hand cases " + std::to_string(bleu_cases.size() - bleu_bad) + "/" +
                    std::to_string(bleu_cases.size()) + bleu_detail +
                    ", self BLEU 100: " + (self_bleu ? "yes" : "no") +
                    ", self WER 0: " + (self_wer ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 7. Joint graph law

Outcome JointGraphLaw() {
  std::mt19937_64 rng(12);
  std::vector<FeatureMatrix> feats = {RandomFeatures(17, 8, rng), RandomFeatures(23, 8, rng)};
  const std::vector<const FeatureMatrix*> batch = {&feats[0], &feats[1]};
  TransformerConfig asr = TinyConfig(8, 14), mt = TinyConfig(0, 13);
  asr.d_model = mt.d_model = 16;
  asr.d_ff = mt.d_ff = 24;
  JointModel<double> model(asr, mt, 0.5, 4);
  const NamedParameters<double> params = model.Parameters();
  for (auto [n, p] : params) p.ZeroGrad();
  Tape<double> tape;
  JointLoss<double> out;
  {
    TapeScope<double> scope(&tape);
    out = model.Forward(batch, {{4, 5, 6}, {7, 8, 9, 10}}, {{6, 5, 4}, {11, 9, 8}});
  }
  Backward(tape, out.l_asr);
  int mt_decoder = 0, mt_nonzero = 0, encoder = 0, encoder_zero = 0;
  for (const auto& [name, p] : params) {
    const auto g = p.grad();
    const bool zero = std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
    if (name.rfind("mt.", 0) == 0) {
      if (name.rfind("mt.decoder", 0) == 0) ++mt_decoder;
      if (!zero) ++mt_nonzero;
    }
    if (name.rfind("asr.encoder", 0) == 0) {
      ++encoder;
      if (zero) ++encoder_zero;
    }
  }
  return {mt_decoder > 0 && mt_nonzero == 0 && encoder > 0 && encoder_zero == 0,
          "dL_ASR: " + std::to_string(mt_nonzero) + " nonzero MT tensors (" +
              std::to_string(mt_decoder) + " MT decoder tensors), " +
              std::to_string(encoder - encoder_zero) + "/" + std::to_string(encoder) +
              " ASR encoder tensors nonzero"};
}

// ---------------------------------------------------------------------------
// 8. Synthetic end-to-end

Outcome EndToEnd(const std::string& run_dir) {
  TrainedRun& run = SharedRun(run_dir);
  if (run.error) return {false, "pipeline failed after " + Fmt(run.seconds, 1) + " s: " + *run.error};
  const double cascade = run.summary.cascade_pipeline_bleu;
  const double joint = run.summary.joint_coupled_bleu;
  int utterances = 0, dominated = 0;
  for (const auto& [name, d] : run.summary.decodes)
    for (std::size_t i = 0; i < d.ids.size(); ++i) {
      ++utterances;
      if (d.coupled_scores[i] >= d.pipeline_scores[i]) ++dominated;
    }
  const bool pass = cascade >= 85.0 && joint >= cascade - 1.0 && run.seconds < 900.0 &&
                    utterances > 0 && dominated == utterances;
  return {pass, "cascade 1-best BLEU " + Fmt(cascade, 2) + ", joint coupled BLEU " +
                    Fmt(joint, 2) + ", wall " + Fmt(run.seconds, 1) + " s, coupled >= pipeline on " +
                    std::to_string(dominated) + "/" + std::to_string(utterances) + " utterances"};
}

// ---------------------------------------------------------------------------
// 9. Nine recipes and the report table

Outcome AllRecipes(const std::string& run_dir) {
  TrainedRun& run = SharedRun(run_dir);
  if (run.error) return {false, "pipeline failed: " + *run.error};
  int decoded = 0, expected = 0;
  std::vector<std::string> problems;
  for (const auto& split : run.config.report_splits) {
    const auto refs = ReadReferences(run.layout.References(split, "translation"));
    for (const Recipe& r : Recipe::All()) {
      ++expected;
      const std::string dir = run.layout.DecodeDir(split, r.Slug());
      const std::string eval = run.layout.EvalFile(split, r.Slug());
      if (!fs::exists(dir + "/translation.1best") || !fs::exists(eval)) {
        problems.push_back(split + " " + r.Name());
        continue;
      }
      if (ReadHypotheses(dir + "/translation.1best").size() != refs.size()) {
        problems.push_back(split + " " + r.Name() + " (count)");
        continue;
      }
      ++decoded;
    }
  }

  const std::string text = ReadFileBytes(run.layout.ReportDir() + "/tables.txt");
  const std::size_t at = text.find("== Joint SLT systems");
  bool table_ok = at != std::string::npos;
  std::string table_detail;
  if (table_ok) {
    const std::size_t end = text.find("\n\n", at);
    const ReportTable t = ParseTable(text.substr(at, end == std::string::npos ? end : end - at + 1));
    table_ok = t.rows.size() == 9 && t.splits == run.config.report_splits &&
               t.metrics == std::vector<std::string>{"BLEU", "WER"};
    const auto all = Recipe::All();
    for (std::size_t i = 0; table_ok && i < t.rows.size(); ++i) {
      const auto& row = t.rows[i];
      const bool wer_row = all[i].joint_mt && !all[i].ext_mt;
      // The first group follows the header rule directly.
      table_ok = row.labels[0] == all[i].Name() && (i == 0 || row.starts_group == (i % 3 == 0));
      if (!table_ok) table_detail = "row " + std::to_string(i) + " label or grouping differs";
      for (std::size_t s = 0; table_ok && s < t.splits.size(); ++s)
        table_ok = row.values[2 * s].has_value() && row.values[2 * s + 1].has_value() == wer_row;
      if (!table_ok && table_detail.empty()) table_detail = "row " + std::to_string(i) + " values differ";
    }
    if (table_ok) table_detail = "9 rows in 3 groups";
    else if (table_detail.empty())
      table_detail = "table shape differs (" + std::to_string(t.rows.size()) + " rows)";
  } else {
    table_detail = "SLT table missing";
  }
  std::string missing;
  for (const auto& p : problems) missing += "; missing " + p;
  return {decoded == expected && table_ok,
          std::to_string(decoded) + "/" + std::to_string(expected) + " recipe decodes, " +
              table_detail + missing};
}

// ---------------------------------------------------------------------------
// 10. Round trips

Outcome RoundTrips() {
  std::mt19937_64 rng(404);
  const Lexicon lex = MakeLexicon(3, 24);
  std::vector<std::string> corpus;
  std::uniform_int_distribution<int> word(0, 23), len(1, 8);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> w(len(rng));
    for (auto& x : w) x = lex.source[word(rng)];
    corpus.push_back(JoinWords(w));
  }
  const SubwordModel bpe = SubwordModel::LearnBpe(corpus, 48);
  const SubwordModel chars = SubwordModel::LearnCharacters(corpus);
  // Fresh word sequences over the lexicon, lengths up to twice the training ones.
  std::uniform_int_distribution<int> long_len(1, 16);
  int ok = 0, total = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> words(long_len(rng));
    for (auto& w : words) w = lex.source[word(rng)];
    const std::string text = JoinWords(words);
    ++total;
    bool good = true;
    for (const SubwordModel* m : {&bpe, &chars}) {
      const TokenSequence t = m->Encode(text);
      good = good && m->Decode(t) == text &&
             std::find(t.ids.begin(), t.ids.end(), kUnkId) == t.ids.end();
    }
    if (good) ++ok;
  }

  FeatureMatrix constant;
  constant.frames = 40;
  constant.dim = 6;
  constant.data.assign(240, 0.0);
  for (int t = 0; t < 40; ++t)
    for (int d = 0; d < 6; ++d) constant.at(t, d) = 0.5 * d - 1.0;
  const FeatureMatrix deltas = AddDeltas(constant);
  double max_delta = 0;
  for (int t = 0; t < deltas.frames; ++t)
    for (int d = 6; d < deltas.dim; ++d) max_delta = std::max(max_delta, std::abs(deltas.at(t, d)));

  SyntheticTaskSpec spec;
  const FeatureMatrix feats = ExtractFeatures(RenderUtterance(spec, {0, 3, 7, 2}, 9), MelOptions{});
  double worst_mean = 0, worst_var = 0;
  for (int d = 0; d < feats.dim; ++d) {
    double mean = 0, var = 0;
    for (int t = 0; t < feats.frames; ++t) mean += feats.at(t, d);
    mean /= feats.frames;
    for (int t = 0; t < feats.frames; ++t) var += (feats.at(t, d) - mean) * (feats.at(t, d) - mean);
    var /= feats.frames;
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_var = std::max(worst_var, std::abs(var - 1.0));
  }
  const bool pass = ok == total && max_delta == 0.0 && worst_mean < 1e-5 && worst_var < 1e-5;
  return {pass, "tokenizer " + std::to_string(ok) + "/" + std::to_string(total) +
                    ", constant-input deltas max " + Fmt(max_delta, 12) + ", CMVN |mean| " +
                    Fmt(worst_mean, 9) + " |var-1| " + Fmt(worst_var, 9) + " over " +
                    std::to_string(feats.dim) + " dims"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string run_dir = (fs::temp_directory_path() / "slt_acceptance_run").string();
  std::vector<int> only;
  app.add_option("--run-dir", run_dir, "Scratch run directory for the end-to-end pipeline");
  app.add_option("--only", only, "Criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", GradientSuite},
      {"coupled selection matches cross-product oracle", [&] { return CoupledOracle(run_dir); }},
      {"exhaustive beam equivalence", ExhaustiveBeam},
      {"ensemble identity", [&] { return EnsembleIdentity(run_dir); }},
      {"checkpoint averaging", CheckpointAveraging},
      {"metric oracles", MetricOracles},
      {"joint graph law", JointGraphLaw},
      {"synthetic end-to-end", [&] { return EndToEnd(run_dir); }},
      {"nine recipes and report table", [&] { return AllRecipes(run_dir); }},
      {"round trips", RoundTrips},
  };
  // The end-to-end run is timed on its own, before the checks that reuse it.
  const std::vector<int> order = {1, 3, 5, 6, 7, 10, 8, 2, 4, 9};
  std::map<int, Outcome> results;
  for (int n : order) {
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[n - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    results[n] = o;
    std::cerr << "  criterion " << n << " done" << std::endl;
  }
  bool all = true;
  for (const auto& [n, o] : results) {
    std::cout << "CRITERION " << n << " " << (o.pass ? "PASS" : "FAIL") << ": "
              << criteria[n - 1].first << " -- " << o.detail << "\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
