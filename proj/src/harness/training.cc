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

#include "slt/harness/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>

#include "slt/decode/averaging.h"
#include "slt/error.h"
#include "slt/numerics/optimizer.h"
#include "slt/numerics/tape.h"

namespace slt {
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Batch = std::vector<const Example*>;

struct BatchView {
  std::vector<const FeatureMatrix*> features;
  std::vector<std::vector<int>> transcripts;
  std::vector<std::vector<int>> translations;
};

BatchView View(const Batch& batch) {
  BatchView v;
  for (const Example* e : batch) {
    v.features.push_back(&e->features);
    v.transcripts.push_back(e->transcript);
    v.translations.push_back(e->translation);
  }
  return v;
}

// The network under training, whichever kind it is.
struct Trainee {
  std::optional<AsrModel<float>> asr;
  std::optional<MtModel<float>> mt;
  std::optional<JointModel<float>> joint;
  Objective objective = Objective::kAsr;

  NamedParameters<float> Parameters() const {
    if (asr) return asr->Parameters();
    if (mt) return mt->Parameters();
    return joint->Parameters();
  }

  // Differentiable objective plus a report; fields the model does not
  // produce are NaN.
  std::pair<Tensor<float>, LossReport> Loss(const BatchView& b, const ForwardContext& ctx) const {
    LossReport r;
    r.l_mt = r.l_asr = kNaN;
    if (asr) {
      SequenceLoss<float> l = asr->Forward(b.features, b.transcripts, ctx);
      r.l_total = r.l_asr = l.loss.item();
      r.asr_tokens = l.tokens;
      return {l.loss, r};
    }
    if (mt) {
      SequenceLoss<float> l = mt->Forward(MtSource<float>::FromTokens(b.transcripts), b.translations, ctx);
      r.l_total = r.l_mt = l.loss.item();
      r.mt_tokens = l.tokens;
      return {l.loss, r};
    }
    if (objective == Objective::kAsr) {
      // The MT half stays outside the graph entirely.
      SequenceLoss<float> l = joint->asr().Forward(b.features, b.transcripts, ctx);
      r.l_total = r.l_asr = l.loss.item();
      r.asr_tokens = l.tokens;
      return {l.loss, r};
    }
    JointLoss<float> l = joint->Forward(b.features, b.transcripts, b.translations, ctx);
    r = l.report;
    if (objective == Objective::kMt) {
      r.l_total = r.l_mt;
      return {l.l_mt, r};
    }
    return {l.total, r};
  }
};

struct DevLoss {
  double total = 0, mt = 0, asr = 0;
};

DevLoss Evaluate(const Trainee& t, const std::vector<Example>& dev, int batch_size) {
  double total = 0, mt = 0, asr = 0;
  long total_n = 0, mt_n = 0, asr_n = 0;
  for (std::size_t start = 0; start < dev.size(); start += batch_size) {
    Batch batch;
    for (std::size_t i = start; i < std::min(dev.size(), start + batch_size); ++i)
      batch.push_back(&dev[i]);
    const auto [loss, r] = t.Loss(View(batch), ForwardContext{});
    (void)loss;
    const int n = t.asr || t.objective == Objective::kAsr ? r.asr_tokens : r.mt_tokens;
    total += r.l_total * n;
    total_n += n;
    if (!std::isnan(r.l_mt)) {
      mt += r.l_mt * r.mt_tokens;
      mt_n += r.mt_tokens;
    }
    if (!std::isnan(r.l_asr)) {
      asr += r.l_asr * r.asr_tokens;
      asr_n += r.asr_tokens;
    }
  }
  return {total_n ? total / total_n : kNaN, mt_n ? mt / mt_n : kNaN, asr_n ? asr / asr_n : kNaN};
}

std::uint64_t ModelSeed(std::uint64_t seed, TrainModel model) {
  return seed * 1000003ULL + 17ULL * (static_cast<std::uint64_t>(model) + 1);
}

std::string FormatValue(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Checkpoint ReadChecked(const std::string& path, const CheckpointMeta& expected) {
  if (!fs::is_regular_file(path)) throw Error("missing model checkpoint " + path);
  Checkpoint c = LoadCheckpoint(path);
  RequireCompatible(expected, c.meta);
  return c;
}

}  // namespace

std::string TrainModelName(TrainModel model) {
  switch (model) {
    case TrainModel::kExtAsr: return "ext-asr";
    case TrainModel::kExtMt: return "ext-mt";
    case TrainModel::kJoint: return "joint";
  }
  throw Error("unknown model");
}

TrainModel ParseTrainModel(const std::string& name) {
  if (name == "ext-asr") return TrainModel::kExtAsr;
  if (name == "ext-mt") return TrainModel::kExtMt;
  if (name == "joint") return TrainModel::kJoint;
  throw Error("unknown model '" + name + "' (expected ext-asr, ext-mt or joint)");
}

std::string ObjectiveName(Objective objective) {
  switch (objective) {
    case Objective::kAsr: return "asr";
    case Objective::kMt: return "mt";
    case Objective::kJoint: return "joint";
  }
  throw Error("unknown objective");
}

Objective ParseObjective(const std::string& name) {
  if (name == "asr") return Objective::kAsr;
  if (name == "mt") return Objective::kMt;
  if (name == "joint") return Objective::kJoint;
  throw Error("unknown objective '" + name + "' (expected asr, mt or joint)");
}

Objective DefaultObjective(TrainModel model) {
  switch (model) {
    case TrainModel::kExtAsr: return Objective::kAsr;
    case TrainModel::kExtMt: return Objective::kMt;
    case TrainModel::kJoint: return Objective::kJoint;
  }
  throw Error("unknown model");
}

CheckpointMeta ExpectedMeta(TrainModel model, const ExperimentConfig& config,
                            const Vocabularies& vocabs) {
  const ModelConfigs cfg = ResolveModelConfigs(config, vocabs);
  CheckpointMeta meta;
  meta.lambda = config.lambda;
  meta.transcript_vocab_hash = vocabs.transcript->Hash();
  switch (model) {
    case TrainModel::kExtAsr:
      meta.kind = ModelKind::kAsr;
      meta.asr = cfg.asr;
      break;
    case TrainModel::kExtMt:
      meta.kind = ModelKind::kMt;
      meta.mt = cfg.mt;
      meta.translation_vocab_hash = vocabs.translation->Hash();
      break;
    case TrainModel::kJoint: {
      meta.kind = ModelKind::kJoint;
      meta.asr = cfg.asr;
      meta.mt = cfg.mt;
      meta.mt.input_dim = cfg.asr.d_model;
      meta.mt.mt_input = MtInputMode::kHidden;
      meta.translation_vocab_hash = vocabs.translation->Hash();
      break;
    }
  }
  return meta;
}

AsrModel<float> LoadAsrModel(const std::string& path, const ExperimentConfig& config,
                             const Vocabularies& vocabs) {
  const CheckpointMeta meta = ExpectedMeta(TrainModel::kExtAsr, config, vocabs);
  const Checkpoint c = ReadChecked(path, meta);
  AsrModel<float> m(meta.asr, 0);
  RestoreCheckpoint(c, m.Parameters());
  return m;
}

MtModel<float> LoadMtModel(const std::string& path, const ExperimentConfig& config,
                           const Vocabularies& vocabs) {
  const CheckpointMeta meta = ExpectedMeta(TrainModel::kExtMt, config, vocabs);
  const Checkpoint c = ReadChecked(path, meta);
  MtModel<float> m(meta.mt, 0);
  RestoreCheckpoint(c, m.Parameters());
  return m;
}

JointModel<float> LoadJointModel(const std::string& path, const ExperimentConfig& config,
                                 const Vocabularies& vocabs) {
  const CheckpointMeta meta = ExpectedMeta(TrainModel::kJoint, config, vocabs);
  const Checkpoint c = ReadChecked(path, meta);
  JointModel<float> m(meta.asr, meta.mt, c.meta.lambda, 0);
  RestoreCheckpoint(c, m.Parameters());
  return m;
}

LossReport EvaluateLoss(const JointModel<float>& model, const std::vector<Example>& examples,
                        int batch_size) {
  Trainee t;
  t.joint = model;
  t.objective = Objective::kJoint;
  const DevLoss d = Evaluate(t, examples, batch_size);
  LossReport r;
  r.l_total = d.total;
  r.l_mt = d.mt;
  r.l_asr = d.asr;
  return r;
}

void WriteLossLog(const std::string& path, const std::vector<LossLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write loss log " + path);
  out << "step\tlr\ttrain_l_total\ttrain_l_mt\ttrain_l_asr\tdev_l_total\tdev_l_mt\tdev_l_asr\t"
         "checkpoint\n";
  for (const auto& e : log) {
    char lr[32];
    std::snprintf(lr, sizeof lr, "%.6g", e.learning_rate);
    out << e.step << '\t' << lr << '\t' << FormatValue(e.train_total) << '\t'
        << FormatValue(e.train_mt) << '\t' << FormatValue(e.train_asr) << '\t'
        << FormatValue(e.dev_total) << '\t' << FormatValue(e.dev_mt) << '\t'
        << FormatValue(e.dev_asr) << '\t' << (e.checkpoint.empty() ? "-" : e.checkpoint) << '\n';
  }
}

TrainingResult RunTraining(const ExperimentConfig& config, const Vocabularies& vocabs,
                           const std::vector<Example>& train, const std::vector<Example>& dev,
                           const TrainingJob& job) {
  if (train.empty()) throw Error("no training examples");
  if (dev.empty()) throw Error("no dev examples");
  if (job.steps < 0) throw Error("step count must be nonnegative");
  if (job.model == TrainModel::kExtAsr && job.objective != Objective::kAsr)
    throw Error("ext-asr trains only with the asr objective");
  if (job.model == TrainModel::kExtMt && job.objective != Objective::kMt)
    throw Error("ext-mt trains only with the mt objective");

  const TrainingSchedule& sched = config.training;
  const CheckpointMeta base_meta = ExpectedMeta(job.model, config, vocabs);
  const std::uint64_t seed = ModelSeed(config.seed, job.model);
  Trainee t;
  t.objective = job.objective;
  switch (job.model) {
    case TrainModel::kExtAsr: t.asr.emplace(base_meta.asr, seed); break;
    case TrainModel::kExtMt: t.mt.emplace(base_meta.mt, seed); break;
    case TrainModel::kJoint:
      t.joint.emplace(base_meta.asr, base_meta.mt, config.lambda, seed);
      break;
  }
  const double dropout = job.model == TrainModel::kExtMt ? base_meta.mt.dropout : base_meta.asr.dropout;
  const int d_model = job.model == TrainModel::kExtMt ? base_meta.mt.d_model : base_meta.asr.d_model;

  const NamedParameters<float> named = t.Parameters();
  std::vector<Tensor<float>> params;
  for (const auto& [name, p] : named) params.push_back(p);
  OptimizerOptions opt_options;
  opt_options.scale = sched.lr_scale;
  opt_options.d_model = d_model;
  opt_options.warmup_steps = sched.warmup_steps;
  opt_options.clip_norm = sched.clip_norm;
  AdamOptimizer<float> optimizer(opt_options);

  fs::create_directories(job.checkpoint_dir);
  const std::string log_path = (fs::path(job.checkpoint_dir) / "loss_log.tsv").string();
  TrainingResult result;

  std::mt19937_64 order_rng(seed ^ 0x5851f42d4c957f2dULL);
  std::mt19937_64 dropout_rng(seed ^ 0x14057b7ef767814fULL);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();  // forces a (re)shuffle on the first step

  {
    const DevLoss d = Evaluate(t, dev, sched.batch_size);
    LossLogEntry e;
    e.dev_total = d.total;
    e.dev_mt = d.mt;
    e.dev_asr = d.asr;
    result.log.push_back(e);
  }

  double sum_total = 0, sum_mt = 0, sum_asr = 0;
  int interval_steps = 0;
  double lr = 0;
  const ForwardContext ctx{true, &dropout_rng, dropout};
  for (int step = 1; step <= job.steps; ++step) {
    Batch batch;
    while (static_cast<int>(batch.size()) < std::min<int>(sched.batch_size, train.size())) {
      if (cursor == order.size()) {
        if (sched.shuffle) std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      batch.push_back(&train[order[cursor++]]);
    }
    try {
      for (auto& p : params) p.ZeroGrad();
      Tape<float> tape;
      Tensor<float> loss;
      LossReport report;
      {
        TapeScope<float> scope(&tape);
        std::tie(loss, report) = t.Loss(View(batch), ctx);
      }
      if (!std::isfinite(report.l_total)) throw NumericError("training loss");
      Backward(tape, loss);
      lr = optimizer.Step(params);
      sum_total += report.l_total;
      sum_mt += report.l_mt;
      sum_asr += report.l_asr;
      ++interval_steps;
    } catch (const NumericError& e) {
      result.diverged = true;
      result.diagnostic = "step " + std::to_string(step) + ": " + e.what();
      result.last_good_checkpoint = result.checkpoints.empty() ? "" : result.checkpoints.back();
      WriteLossLog(log_path, result.log);
      return result;
    }

    if (step % sched.checkpoint_every == 0) {
      const DevLoss d = Evaluate(t, dev, sched.batch_size);
      char name[32];
      std::snprintf(name, sizeof name, "step-%06d.ckpt", step);
      const std::string path = (fs::path(job.checkpoint_dir) / name).string();
      CheckpointMeta meta = base_meta;
      meta.step = step;
      meta.dev_loss = d.total;
      SaveCheckpoint(path, CaptureCheckpoint(named, meta));
      result.checkpoints.push_back(path);
      LossLogEntry e;
      e.step = step;
      e.learning_rate = lr;
      e.train_total = sum_total / interval_steps;
      e.train_mt = sum_mt / interval_steps;
      e.train_asr = sum_asr / interval_steps;
      e.dev_total = d.total;
      e.dev_mt = d.mt;
      e.dev_asr = d.asr;
      e.checkpoint = name;
      result.log.push_back(e);
      sum_total = sum_mt = sum_asr = 0;
      interval_steps = 0;
    }
  }
  WriteLossLog(log_path, result.log);

  // Final model: mean of the k checkpoints with the lowest dev loss (the
  // later step wins ties); with no checkpoints, the current weights.
  std::vector<std::pair<double, std::string>> ranked;
  for (std::size_t i = 1; i < result.log.size(); ++i) {
    const auto& e = result.log[i];
    ranked.push_back({e.dev_total, (fs::path(job.checkpoint_dir) / e.checkpoint).string()});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  });
  Checkpoint final_ckpt;
  if (ranked.empty()) {
    CheckpointMeta meta = base_meta;
    meta.step = job.steps;
    final_ckpt = CaptureCheckpoint(named, meta);
  } else {
    std::vector<Checkpoint> chosen;
    for (std::size_t i = 0; i < ranked.size() && static_cast<int>(i) < sched.average_k; ++i) {
      chosen.push_back(LoadCheckpoint(ranked[i].second));
      result.averaged.push_back(ranked[i].second);
    }
    final_ckpt = AverageCheckpoints(chosen);
    RestoreCheckpoint(final_ckpt, named);
    final_ckpt.meta.dev_loss = Evaluate(t, dev, sched.batch_size).total;
  }
  if (!job.final_path.empty()) {
    if (fs::path(job.final_path).has_parent_path())
      fs::create_directories(fs::path(job.final_path).parent_path());
    SaveCheckpoint(job.final_path, final_ckpt);
    result.final_model = job.final_path;
  }
  return result;
}

}  // namespace slt
