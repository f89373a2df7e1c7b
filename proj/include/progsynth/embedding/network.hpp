// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "progsynth/dsl/ast.hpp"
#include "progsynth/dsl/mask.hpp"
#include "progsynth/embedding/model.hpp"
#include "progsynth/trace.hpp"

namespace progsynth::embedding {

/// Legal-token sets seen before each decoder step of `tokens` followed by <end>.
std::vector<dsl::TokenSet> teacher_masks(const std::vector<dsl::Token>& tokens);

/// One training program with everything the three losses read.
struct Example {
  const std::vector<dsl::Token>* tokens = nullptr;
  const std::vector<dsl::TokenSet>* masks = nullptr;  // tokens->size() + 1 entries
  const std::vector<Rollout>* rollouts = nullptr;
  const dsl::Program* program = nullptr;
};

struct Encoding {
  MatrixXd mu;  // D x B
  MatrixXd log_sigma;
};

Encoding encode_batch(const Params& params, const std::vector<const std::vector<dsl::Token>*>& programs);
Encoding encode_one(const Params& params, const std::vector<dsl::Token>& program);

/// z = mu + exp(log_sigma) * eps
MatrixXd reparameterize(const Encoding& enc, const MatrixXd& eps);
MatrixXd sample_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng);

enum class DecodeMode { kGreedy, kSample };

struct Decoded {
  std::vector<dsl::Token> tokens;  // without <end>
  std::vector<dsl::TokenSet> masks;  // one per emitted token, <end> included
  double log_prob = 0.0;
};

/// Autoregressive decoding of each column of `z` under the grammar mask.
/// `rng` is required for kSample and ignored for kGreedy.
std::vector<Decoded> decode_batch(const Params& params, const MatrixXd& z, DecodeMode mode, Rng* rng = nullptr);
Decoded decode_one(const Params& params, const VectorXd& z, DecodeMode mode, Rng* rng = nullptr);

struct LossWeights {
  double program = 1.0;   // token likelihood + beta * KL
  double behavior = 0.0;  // REINFORCE on decoded-program behavior
  double latent = 1.0;    // policy action cross-entropy
};

struct LossOptions {
  double beta = 0.1;
  double baseline = 0.0;
  int exec_cap = 100;
  /// When set, the behavior term scores these programs instead of sampling.
  const std::vector<Decoded>* behavior_samples = nullptr;
};

struct LossReport {
  double total = 0.0;
  double nll = 0.0;  // batch-mean summed token NLL
  double kl = 0.0;
  double program = 0.0;
  double latent = 0.0;
  double behavior = 0.0;
  std::vector<double> rewards;  // behavior reward per program
  long tokens = 0;
  long tokens_correct = 0;  // teacher-forced argmax hits
  long action_steps = 0;
  long actions_correct = 0;
  long rollouts = 0;
  long rollouts_exact = 0;
};

/*!
 * \brief Weighted loss of one batch and, when `grad` is non-null, its gradient
 * (accumulated into `grad`).
 *
 * `eps` (latent x batch) is the reparameterization noise shared by the
 * decoder and policy terms. `rng` drives behavior sampling only.
 */
LossReport compute_loss(const Params& params, const std::vector<Example>& batch, const LossWeights& weights,
                        const LossOptions& options, const MatrixXd& eps, Rng* rng, Params* grad);

/// Policy action predictions with teacher-forced inputs; counts only.
LossReport policy_accuracy(const Params& params, const MatrixXd& z, const std::vector<const std::vector<Rollout>*>& rollouts);

}  // namespace progsynth::embedding
