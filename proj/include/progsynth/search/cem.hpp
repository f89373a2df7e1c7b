// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace progsynth::search {

/// Score of one latent vector; `program` is empty when nothing was decoded.
struct Candidate {
  double reward = 0.0;
  std::string program;
};

/// Scores every column of a latent matrix. Must be pure: the same column
/// always receives the same score regardless of its position or batch.
using BatchEvaluator = std::function<std::vector<Candidate>(const Eigen::MatrixXd& z)>;

enum class InitDistribution {
  kOnes,      // the all-ones vector, no noise
  kStandard,  // N(0, I)
  kNarrow,    // N(0, 0.1^2 I)
};

std::string init_name(InitDistribution d);
InitDistribution init_from_name(const std::string& name);

struct CemConfig {
  int population = 16;
  double sigma = 0.25;
  double elite_fraction = 0.1;
  bool exp_sigma_decay = false;
  InitDistribution init = InitDistribution::kNarrow;
  int max_iters = 1000;
  /// Consecutive iterations the decoded center must reach `max_reward`.
  int patience = 10;
  double max_reward = 1.0;
  /// Floor and horizon of the exponential sigma decay.
  double sigma_floor = 0.1;
  int decay_iters = 500;

  int elites() const;
  std::string validate() const;
};

void to_json(nlohmann::json& j, const CemConfig& c);
void from_json(const nlohmann::json& j, CemConfig& c);

/// sigma_t = max(floor, sigma_0 * (floor / sigma_0)^(t / decay_iters)) when decay is on.
double sigma_at(const CemConfig& cfg, int iter);

struct IterationLog {
  int iteration = 0;
  double sigma = 0.0;
  double mean_reward = 0.0;
  double best_reward = 0.0;  // best in this population
  double best_so_far = 0.0;
  double center_reward = 0.0;
  std::string center_program;
  Eigen::VectorXd center;  // the center the population was drawn around
};

struct SearchResult {
  double best_reward = 0.0;
  std::string best_program;
  Eigen::VectorXd best_latent;
  Eigen::VectorXd center;  // final center
  std::vector<IterationLog> log;
  bool converged = false;
  int iterations = 0;
};

Eigen::VectorXd draw_init(InitDistribution d, int dim, uint64_t seed);

/*!
 * \brief Cross-entropy search. Each iteration draws `population` points
 * around the center, keeps the top `elites()` by reward and moves the center
 * to their reward-weighted mean (uniform weights when no elite reward is
 * positive). Stops once the decoded center scores `max_reward` for
 * `patience` consecutive iterations.
 */
SearchResult cem_search(const BatchEvaluator& eval, int dim, const CemConfig& cfg, uint64_t seed);

/// One initial draw plus `n` Gaussian perturbations; returns the best.
SearchResult random_search(const BatchEvaluator& eval, int dim, int n, double sigma, InitDistribution init,
                           uint64_t seed);

std::string search_log_header();
std::string search_log_line(const IterationLog& row);
/// One row per iteration: iteration followed by the center coordinates.
std::string trajectory_csv(const SearchResult& result);

}  // namespace progsynth::search
