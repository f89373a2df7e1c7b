// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/trace.hpp"

namespace progsynth {

std::vector<GridState> Rollout::states() const {
  std::vector<GridState> out;
  out.reserve(actions.size() + 1);
  out.push_back(initial_state);
  GridState s = initial_state;
  for (Action a : actions) {
    step_in_place(s, a);
    out.push_back(s);
  }
  return out;
}

GridState Rollout::final_state() const {
  GridState s = initial_state;
  for (Action a : actions) step_in_place(s, a);
  return s;
}

}  // namespace progsynth
