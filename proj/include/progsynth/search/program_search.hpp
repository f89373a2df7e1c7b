// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "progsynth/datagen.hpp"
#include "progsynth/dsl/ast.hpp"
#include "progsynth/embedding/model.hpp"
#include "progsynth/search/cem.hpp"
#include "progsynth/tasks.hpp"

namespace progsynth::search {

using ProgramReward = std::function<double(const dsl::Program&)>;

/*!
 * \brief Greedy-decodes every latent with `params` and scores the program.
 * Scores are memoized by program text, so `reward` must be pure. Decoding and
 * scoring are split across `workers` threads (0 = hardware concurrency).
 * `params` must outlive the evaluator.
 */
BatchEvaluator decoder_evaluator(const embedding::Params& params, ProgramReward reward, int workers = 1);

/// Fixed random worlds for behavior matching, drawn from `seed`.
std::vector<GridState> reconstruction_states(uint64_t seed, int n = 10, const datagen::WorldSamplerConfig& world = {});

/// r_mat(candidate, target, states) + 0.1 for a well-formed program, in [0.1, 1.1].
ProgramReward reconstruction_reward(dsl::Program target, std::vector<GridState> states, int exec_cap = 100);
inline constexpr double kReconstructionMax = 1.1;

/// Mean task return over the given instances.
ProgramReward task_return(std::vector<TaskInstance> instances);

/// Instances for configuration seeds config_seed(base_seed, 0..n-1).
std::vector<TaskInstance> task_instances(const TaskSpec& spec, int n, uint64_t base_seed);

double mean_return(const dsl::Program& program, const std::vector<TaskInstance>& instances);

}  // namespace progsynth::search
