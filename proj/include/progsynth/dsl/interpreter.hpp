// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "progsynth/dsl/ast.hpp"
#include "progsynth/trace.hpp"

namespace progsynth::dsl {

inline constexpr int kDefaultExecCap = 100;

/// Node visits allowed per executed-action budget; bounds action-free loops.
inline constexpr int kNodeVisitsPerAction = 100;

/*!
 * \brief Runs `program` from `init`.
 *
 * WHILE re-checks its condition before every iteration, IF/IFELSE check once
 * on entry, REPEAT runs its body exactly n times. Execution stops at the end
 * of the program, before the (exec_cap+1)-th action, or once
 * exec_cap * kNodeVisitsPerAction statements/conditions have been visited.
 */
Rollout execute(const Program& program, const GridState& init, int exec_cap = kDefaultExecCap);

/// Every (node, outcome) pair a complete branch-coverage set must contain.
std::vector<BranchEvent> required_branches(const Program& program);

/// Mean over aligned prefixes: |longest common prefix| / max(len); 1 when both are empty.
double trace_match(std::span<const Action> a, std::span<const Action> b);

/// Behavior-matching reward in [0, 1]: trace_match averaged over `inits`.
double r_mat(const Program& candidate, const Program& reference, std::span<const GridState> inits,
             int exec_cap = kDefaultExecCap);

}  // namespace progsynth::dsl
