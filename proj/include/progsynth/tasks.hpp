// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "progsynth/trace.hpp"
#include "progsynth/world.hpp"

namespace progsynth {

enum class TaskKind : uint8_t {
  kStairClimber = 0,
  kFourCorner = 1,
  kTopOff = 2,
  kMaze = 3,
  kCleanHouse = 4,
  kHarvester = 5,
};

inline constexpr std::array<TaskKind, 6> kAllTasks = {
    TaskKind::kStairClimber, TaskKind::kFourCorner, TaskKind::kTopOff,
    TaskKind::kMaze,         TaskKind::kCleanHouse, TaskKind::kHarvester};

std::string_view task_name(TaskKind kind);
/// Accepts the canonical names case-insensitively; throws std::invalid_argument otherwise.
TaskKind task_from_name(std::string_view name);

enum class RewardRange : uint8_t { kUnit, kSigned };

struct TaskSpec {
  TaskKind kind = TaskKind::kStairClimber;
  int height = 0;
  int width = 0;
  RewardRange range = RewardRange::kUnit;
  int horizon = 100;
  /// TopOff only: chance that each candidate bottom-row cell starts with a marker.
  double topoff_marker_prob = 0.5;

  double min_reward() const { return range == RewardRange::kSigned ? -1.0 : 0.0; }
  double max_reward() const { return 1.0; }
};

inline constexpr int kDefaultHorizon = 100;

/// Task at its standard grid size.
TaskSpec default_spec(TaskKind kind);
/// Task at a custom grid size; the horizon grows with the grid area.
TaskSpec scaled_spec(TaskKind kind, int height, int width);

struct TaskInstance {
  TaskSpec spec;
  GridState initial;
  uint64_t seed = 0;

  std::optional<Cell> goal;        // StairClimber, Maze
  std::vector<Cell> stair_cells;   // StairClimber, sorted
  std::vector<Cell> corners;       // FourCorner
  std::vector<Cell> target_cells;  // TopOff bottom-row markers, CleanHouse garbage, sorted
  int total_markers = 0;
};

TaskInstance sample_task(const TaskSpec& spec, uint64_t seed);
inline TaskInstance sample_task(TaskKind kind, uint64_t seed) {
  return sample_task(default_spec(kind), seed);
}

/// Episode return of `trace` on `instance`; throws std::invalid_argument when the
/// trace does not start from `instance.initial`.
double task_reward(const TaskInstance& instance, const Rollout& trace);

/// True when the trace contains a putMarker on a cell the task never wants a marker on.
bool has_misplaced_marker(const TaskInstance& instance, const Rollout& trace);

/// Seed of the i-th evaluation configuration derived from `base_seed`.
uint64_t config_seed(uint64_t base_seed, int index);

using PolicyRunner = std::function<Rollout(const GridState& init, int horizon)>;

/// Mean of task_reward over `n_configs` instances seeded from `base_seed`.
double mean_task_return(const TaskSpec& spec, const PolicyRunner& policy, int n_configs = 10,
                        uint64_t base_seed = 0);

/// Parses a layout made of '#', '.', 'M', 'D' (dustbin, 2 markers) and 'A' (agent, facing east).
GridState parse_layout(std::string_view text);
/// The checked-in apartment used by CleanHouse.
std::string_view clean_house_layout();

}  // namespace progsynth
