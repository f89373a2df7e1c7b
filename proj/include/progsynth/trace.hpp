// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "progsynth/world.hpp"

namespace progsynth {

enum class Termination : uint8_t { kProgramEnd = 0, kStepCap = 1 };

/// One evaluation of a branching construct: which AST node and which way it went.
struct BranchEvent {
  int node = 0;
  bool taken = false;
  friend bool operator==(const BranchEvent&, const BranchEvent&) = default;
  friend auto operator<=>(const BranchEvent&, const BranchEvent&) = default;
};

/*!
 * \brief Execution trace of one program from one initial state.
 *
 * `perceptions[t]` is what the agent saw right before `actions[t]`, and
 * `action_nodes[t]` is the AST node that emitted it. `branch_events` is the
 * sorted set of distinct (node, outcome) pairs observed during the run.
 */
struct Rollout {
  GridState initial_state;
  std::vector<Action> actions;
  std::vector<Perception> perceptions;
  std::vector<ActionFlags> flags;
  std::vector<int> action_nodes;
  std::vector<BranchEvent> branch_events;
  Termination terminated = Termination::kProgramEnd;

  size_t size() const { return actions.size(); }
  /// Replays the actions and returns every intermediate state, initial state first.
  std::vector<GridState> states() const;
  GridState final_state() const;
};

}  // namespace progsynth
