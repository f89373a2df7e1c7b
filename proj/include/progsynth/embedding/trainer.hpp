// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "progsynth/datagen.hpp"
#include "progsynth/embedding/network.hpp"

namespace progsynth::embedding {

struct TrainConfig {
  ModelDims dims;
  double beta = 0.1;
  double supervised_lr = 1e-3;
  double rl_lr = 5e-4;
  int batch_size = 64;
  /// Each round is one supervised epoch followed by as many behavior updates.
  int rounds = 4;
  LossWeights supervised{1.0, 0.0, 1.0};
  LossWeights behavior{0.0, 1.0, 0.0};
  double baseline_decay = 0.99;
  /// Global gradient-norm clip; 0 disables.
  double grad_clip = 0.0;
  int exec_cap = 100;
  /// Validation programs used for per-phase metrics; 0 = whole split.
  int eval_programs = 0;
  bool eval_smoothness = false;

  static TrainConfig desk();
  static TrainConfig full();
  static TrainConfig preset(const std::string& name);
  std::string validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Adam {
 public:
  explicit Adam(const ModelDims& dims, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(Params& params, const Params& grad, double lr);
  long steps() const { return t_; }

 private:
  Params m_;
  Params v_;
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
};

/// Token sequences and teacher masks for every record of a split.
class PreparedSplit {
 public:
  explicit PreparedSplit(const datagen::Split& split, int limit = 0);
  size_t size() const { return tokens_.size(); }
  Example example(size_t i) const;
  std::vector<Example> examples(const std::vector<size_t>& indices) const;
  const datagen::DatasetRecord& record(size_t i) const { return split_->records[i]; }

 private:
  const datagen::Split* split_;
  std::vector<std::vector<dsl::Token>> tokens_;
  std::vector<std::vector<dsl::TokenSet>> masks_;
};

struct EvalMetrics {
  double token_acc = 0.0;  // policy action accuracy, teacher-forced from z = mu
  double seq_acc = 0.0;  // fraction of rollouts predicted exactly
  double program_token_acc = 0.0;  // decoder token accuracy, teacher-forced
  double exact_rate = 0.0;  // greedy decode of mu reproduces the program text
  double valid_rate = 0.0;  // greedy decodes that parse
  double val_r_mat = 0.0;  // behavior match of greedy decodes on the stored initial states
  double loss_program = 0.0;
  double loss_latent = 0.0;
  double smoothness = std::numeric_limits<double>::quiet_NaN();
};

struct EvalOptions {
  int max_programs = 0;
  bool smoothness = false;
  int neighbors = 10;
  int exec_cap = 100;
};

EvalMetrics eval_metrics(const Params& params, const datagen::Split& split, const EvalOptions& opt = {});

/*!
 * \brief Mean behavior match between each program and the greedy decodes of
 * its `neighbors` nearest latent means, from the program's first stored
 * initial state.
 */
double latent_smoothness(const Params& params, const datagen::Split& split, int neighbors = 10, int exec_cap = 100,
                         int max_programs = 0);

/// Owns parameters, optimizers, the behavior baseline and the noise stream.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, uint64_t seed);
  Trainer(const TrainConfig& cfg, Params init, uint64_t seed);

  enum class Phase { kSupervised, kBehavior };
  /// One optimizer update on `batch` with the given loss weights.
  LossReport step(const std::vector<Example>& batch, const LossWeights& weights, Phase phase);

  const Params& params() const { return params_; }
  double baseline() const { return baseline_; }
  Rng& rng() { return rng_; }

 private:
  TrainConfig cfg_;
  Params params_;
  Adam supervised_;
  Adam behavior_;
  Rng rng_;
  double baseline_ = 0.0;
  bool baseline_ready_ = false;
};

struct LogRow {
  int round = 0;
  std::string phase;
  int updates = 0;
  double loss_program = 0.0;
  double loss_latent = 0.0;
  double loss_behavior = 0.0;
  double mean_reward = 0.0;
  double baseline = 0.0;
  EvalMetrics val;
  double seconds = 0.0;
};

std::string log_header();
std::string log_line(const LogRow& row);

struct TrainResult {
  Params best;
  EvalMetrics best_metrics;
  int best_round = 0;
  std::string best_phase;
  Params last;
  std::vector<LogRow> log;
};

/*!
 * \brief Alternating training on `ds.train`, evaluating on `ds.val` after
 * every phase. The released parameters are the ones with the best validation
 * action accuracy. When `out_dir` is non-empty, writes metrics.csv,
 * best.ckpt and last.ckpt there.
 */
TrainResult train(const TrainConfig& cfg, const datagen::Dataset& ds, uint64_t seed,
                  const std::filesystem::path& out_dir = {},
                  const std::function<void(const LogRow&)>& on_row = nullptr);

}  // namespace progsynth::embedding
