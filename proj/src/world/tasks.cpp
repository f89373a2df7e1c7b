// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "progsynth/rng.hpp"
#include "clean_house_layout.inc"

namespace progsynth {

namespace {

struct TaskInfo {
  TaskKind kind;
  std::string_view name;
  int height;
  int width;
  RewardRange range;
};

constexpr std::array<TaskInfo, 6> kTaskTable{{
    {TaskKind::kStairClimber, "StairClimber", 12, 12, RewardRange::kSigned},
    {TaskKind::kFourCorner, "FourCorner", 12, 12, RewardRange::kUnit},
    {TaskKind::kTopOff, "TopOff", 12, 12, RewardRange::kUnit},
    {TaskKind::kMaze, "Maze", 8, 8, RewardRange::kUnit},
    {TaskKind::kCleanHouse, "CleanHouse", 14, 22, RewardRange::kUnit},
    {TaskKind::kHarvester, "Harvester", 8, 8, RewardRange::kUnit},
}};

const TaskInfo& info(TaskKind kind) { return kTaskTable[static_cast<int>(kind)]; }

bool contains(const std::vector<Cell>& sorted, Cell c) {
  return std::binary_search(sorted.begin(), sorted.end(), c);
}

// Landing k is where the agent stands facing east before climbing one step;
// the riser above it connects to landing k+1.
void build_stairs(TaskInstance& inst, Rng& rng) {
  const int h = inst.spec.height;
  const int w = inst.spec.width;
  GridState g(h, w);
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) {
      if (r + c >= h) g.set_wall(r, c, true);
    }
  }
  const int last = std::min(h - 3, w - 3);
  if (last < 1) throw std::invalid_argument("StairClimber grid too small");
  std::vector<Cell> landings;
  for (int k = 0; k <= last; ++k) {
    landings.push_back({h - 2 - k, 1 + k});
    inst.stair_cells.push_back({h - 2 - k, 1 + k});
    if (k < last) inst.stair_cells.push_back({h - 3 - k, 1 + k});
  }
  std::sort(inst.stair_cells.begin(), inst.stair_cells.end());
  const int agent_k = uniform_int(rng, 0, last - 1);
  const int goal_k = uniform_int(rng, agent_k + 1, last);
  g.set_agent(landings[agent_k].row, landings[agent_k].col, Direction::kEast);
  g.set_markers(landings[goal_k].row, landings[goal_k].col, 1);
  inst.goal = landings[goal_k];
  inst.initial = std::move(g);
}

void build_four_corner(TaskInstance& inst) {
  const int h = inst.spec.height;
  const int w = inst.spec.width;
  GridState g(h, w);
  g.set_agent(h - 2, 1, Direction::kEast);
  inst.corners = {{1, 1}, {1, w - 2}, {h - 2, 1}, {h - 2, w - 2}};
  std::sort(inst.corners.begin(), inst.corners.end());
  inst.initial = std::move(g);
}

void build_top_off(TaskInstance& inst, Rng& rng) {
  const int h = inst.spec.height;
  const int w = inst.spec.width;
  GridState g(h, w);
  // Every bottom-row cell except the last one is a candidate.
  for (int c = 1; c <= w - 3; ++c) {
    if (uniform_real(rng) < inst.spec.topoff_marker_prob) {
      g.set_markers(h - 2, c, 1);
      inst.target_cells.push_back({h - 2, c});
    }
  }
  g.set_agent(h - 2, 1, Direction::kEast);
  inst.total_markers = static_cast<int>(inst.target_cells.size());
  inst.initial = std::move(g);
}

// Randomized depth-first carving over the odd-coordinate lattice.
void build_maze(TaskInstance& inst, Rng& rng) {
  const int h = inst.spec.height;
  const int w = inst.spec.width;
  GridState g(h, w);
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) g.set_wall(r, c, true);
  }
  std::vector<Cell> cells;
  for (int r = 1; r < h - 1; r += 2) {
    for (int c = 1; c < w - 1; c += 2) cells.push_back({r, c});
  }
  if (cells.size() < 2) throw std::invalid_argument("Maze grid too small");
  const int rows = (h - 1) / 2;
  const int cols = (w - 1) / 2;
  auto id = [&](Cell c) { return (c.row / 2) * cols + (c.col / 2); };
  std::vector<uint8_t> seen(static_cast<size_t>(rows) * cols, 0);
  Cell start = cells[uniform_int(rng, 0, static_cast<int>(cells.size()) - 1)];
  std::vector<Cell> stack{start};
  seen[id(start)] = 1;
  g.set_wall(start.row, start.col, false);
  while (!stack.empty()) {
    const Cell cur = stack.back();
    std::vector<Direction> options;
    for (int d = 0; d < 4; ++d) {
      const Cell off = direction_offset(static_cast<Direction>(d));
      const Cell nxt{cur.row + 2 * off.row, cur.col + 2 * off.col};
      if (nxt.row < 1 || nxt.col < 1 || nxt.row > h - 2 || nxt.col > w - 2) continue;
      if (!seen[id(nxt)]) options.push_back(static_cast<Direction>(d));
    }
    if (options.empty()) {
      stack.pop_back();
      continue;
    }
    const Cell off = direction_offset(options[uniform_int(rng, 0, static_cast<int>(options.size()) - 1)]);
    const Cell nxt{cur.row + 2 * off.row, cur.col + 2 * off.col};
    g.set_wall(cur.row + off.row, cur.col + off.col, false);
    g.set_wall(nxt.row, nxt.col, false);
    seen[id(nxt)] = 1;
    stack.push_back(nxt);
  }
  const int n = static_cast<int>(cells.size());
  const int agent = uniform_int(rng, 0, n - 1);
  int goal = uniform_int(rng, 0, n - 2);
  if (goal >= agent) ++goal;
  g.set_agent(cells[agent].row, cells[agent].col, static_cast<Direction>(uniform_int(rng, 0, 3)));
  g.set_markers(cells[goal].row, cells[goal].col, 1);
  inst.goal = cells[goal];
  inst.initial = std::move(g);
}

void build_clean_house(TaskInstance& inst, Rng& rng) {
  const GridState layout = parse_layout(clean_house_layout());
  const int h = inst.spec.height;
  const int w = inst.spec.width;
  if (h < layout.height() || w < layout.width()) {
    throw std::invalid_argument("CleanHouse grid smaller than its layout");
  }
  // Larger grids embed the apartment in the top-left corner; the rest is solid wall.
  GridState g(h, w);
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) {
      const bool inside = r < layout.height() - 1 && c < layout.width() - 1;
      g.set_wall(r, c, inside ? layout.is_wall(r, c) : true);
      if (inside) g.set_markers(r, c, layout.markers(r, c));
    }
  }
  g.set_agent(layout.agent().row, layout.agent().col, layout.agent_dir());
  std::vector<Cell> candidates;
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) {
      if (g.is_wall(r, c) || g.markers(r, c) > 0 || Cell{r, c} == g.agent()) continue;
      const bool near_wall = g.is_wall(r - 1, c) || g.is_wall(r + 1, c) || g.is_wall(r, c - 1) ||
                             g.is_wall(r, c + 1);
      if (near_wall) candidates.push_back({r, c});
    }
  }
  constexpr int kGarbage = 10;
  if (static_cast<int>(candidates.size()) < kGarbage) {
    throw std::invalid_argument("CleanHouse layout has too few wall-adjacent cells");
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(kGarbage);
  for (Cell c : candidates) g.set_markers(c.row, c.col, 1);
  std::sort(candidates.begin(), candidates.end());
  inst.target_cells = std::move(candidates);
  inst.total_markers = kGarbage;
  inst.initial = std::move(g);
}

void build_harvester(TaskInstance& inst) {
  const int h = inst.spec.height;
  const int w = inst.spec.width;
  GridState g(h, w);
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) g.set_markers(r, c, 1);
  }
  g.set_agent(h - 2, 1, Direction::kEast);
  inst.total_markers = g.total_markers();
  inst.initial = std::move(g);
}

bool misplaced_put(const TaskInstance& inst, const GridState& before) {
  const Cell pos = before.agent();
  switch (inst.spec.kind) {
    case TaskKind::kFourCorner:
      return !contains(inst.corners, pos);
    case TaskKind::kTopOff:
      return inst.initial.markers(pos) == 0 || before.markers(pos) >= 2;
    default:
      return false;
  }
}

double stair_reward(const TaskInstance& inst, const std::vector<GridState>& states) {
  for (const GridState& s : states) {
    if (s.agent() == *inst.goal) return 1.0;
    if (!contains(inst.stair_cells, s.agent())) return -1.0;
  }
  return 0.0;
}

double top_off_reward(const TaskInstance& inst, const GridState& final_state) {
  const int row = inst.spec.height - 2;
  int streak = 0;
  for (int c = 1; c <= inst.spec.width - 2; ++c) {
    const int before = inst.initial.markers(row, c);
    const int after = final_state.markers(row, c);
    if (before > 0) {
      if (after != before + 1) break;
      ++streak;
    } else if (after > 0) {
      break;
    }
  }
  const bool at_end = final_state.agent() == Cell{row, inst.spec.width - 2};
  return (streak + (at_end ? 1.0 : 0.0)) / (inst.total_markers + 1.0);
}

}  // namespace

std::string_view task_name(TaskKind kind) { return info(kind).name; }

TaskKind task_from_name(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
  };
  const std::string key = lower(name);
  for (const TaskInfo& t : kTaskTable) {
    if (lower(t.name) == key) return t.kind;
  }
  throw std::invalid_argument("unknown task: " + std::string(name));
}

TaskSpec default_spec(TaskKind kind) {
  const TaskInfo& t = info(kind);
  TaskSpec spec;
  spec.kind = kind;
  spec.height = t.height;
  spec.width = t.width;
  spec.range = t.range;
  spec.horizon = kDefaultHorizon;
  return spec;
}

TaskSpec scaled_spec(TaskKind kind, int height, int width) {
  TaskSpec spec = default_spec(kind);
  const double ratio = static_cast<double>(height) * width / (static_cast<double>(spec.height) * spec.width);
  spec.height = height;
  spec.width = width;
  spec.horizon = std::max(kDefaultHorizon, static_cast<int>(std::ceil(kDefaultHorizon * ratio)));
  return spec;
}

TaskInstance sample_task(const TaskSpec& spec, uint64_t seed) {
  if (static_cast<size_t>(spec.kind) >= kTaskTable.size()) {
    throw std::invalid_argument("invalid task kind");
  }
  TaskInstance inst;
  inst.spec = spec;
  inst.seed = seed;
  Rng rng(derive_seed(seed, 0x7a5c + static_cast<uint64_t>(spec.kind)));
  switch (spec.kind) {
    case TaskKind::kStairClimber: build_stairs(inst, rng); break;
    case TaskKind::kFourCorner: build_four_corner(inst); break;
    case TaskKind::kTopOff: build_top_off(inst, rng); break;
    case TaskKind::kMaze: build_maze(inst, rng); break;
    case TaskKind::kCleanHouse: build_clean_house(inst, rng); break;
    case TaskKind::kHarvester: build_harvester(inst); break;
  }
  return inst;
}

bool has_misplaced_marker(const TaskInstance& instance, const Rollout& trace) {
  GridState s = instance.initial;
  for (Action a : trace.actions) {
    if (a == Action::kPutMarker && misplaced_put(instance, s)) return true;
    step_in_place(s, a);
  }
  return false;
}

double task_reward(const TaskInstance& instance, const Rollout& trace) {
  if (!(trace.initial_state == instance.initial)) {
    throw std::invalid_argument("trace was not produced from this task instance");
  }
  switch (instance.spec.kind) {
    case TaskKind::kStairClimber:
      return stair_reward(instance, trace.states());
    case TaskKind::kFourCorner: {
      if (has_misplaced_marker(instance, trace)) return 0.0;
      const GridState end = trace.final_state();
      int filled = 0;
      for (Cell c : instance.corners) filled += end.markers(c) > 0 ? 1 : 0;
      return filled / 4.0;
    }
    case TaskKind::kTopOff:
      if (has_misplaced_marker(instance, trace)) return 0.0;
      return top_off_reward(instance, trace.final_state());
    case TaskKind::kMaze: {
      for (const GridState& s : trace.states()) {
        if (s.agent() == *instance.goal) return 1.0;
      }
      return 0.0;
    }
    case TaskKind::kCleanHouse: {
      const GridState end = trace.final_state();
      int cleaned = 0;
      for (Cell c : instance.target_cells) cleaned += end.markers(c) == 0 ? 1 : 0;
      return static_cast<double>(cleaned) / instance.total_markers;
    }
    case TaskKind::kHarvester: {
      const int left = trace.final_state().total_markers();
      const int picked = std::max(0, instance.total_markers - left);
      return std::min(1.0, static_cast<double>(picked) / instance.total_markers);
    }
  }
  return 0.0;
}

uint64_t config_seed(uint64_t base_seed, int index) {
  return derive_seed(base_seed, 0x10000 + static_cast<uint64_t>(index));
}

double mean_task_return(const TaskSpec& spec, const PolicyRunner& policy, int n_configs,
                        uint64_t base_seed) {
  if (n_configs < 1) throw std::invalid_argument("n_configs must be >= 1");
  double total = 0.0;
  for (int i = 0; i < n_configs; ++i) {
    const TaskInstance inst = sample_task(spec, config_seed(base_seed, i));
    total += task_reward(inst, policy(inst.initial, spec.horizon));
  }
  return total / n_configs;
}

GridState parse_layout(std::string_view text) {
  std::vector<std::string> rows;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(std::move(line));
    start = end + 1;
  }
  if (rows.size() < 3) throw std::invalid_argument("layout needs at least 3 rows");
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  GridState g(h, w);
  bool agent_seen = false;
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[r].size()) != w) throw std::invalid_argument("layout rows differ in width");
    for (int c = 0; c < w; ++c) {
      const char ch = rows[r][c];
      if (g.is_boundary(r, c)) {
        if (ch != '#') throw std::invalid_argument("layout boundary must be wall");
        continue;
      }
      switch (ch) {
        case '#': g.set_wall(r, c, true); break;
        case '.': break;
        case 'M': g.set_markers(r, c, 1); break;
        case 'D': g.set_markers(r, c, 2); break;
        case 'A':
          g.set_agent(r, c, Direction::kEast);
          agent_seen = true;
          break;
        default:
          throw std::invalid_argument(std::string("unexpected layout character '") + ch + "'");
      }
    }
  }
  if (!agent_seen) throw std::invalid_argument("layout has no agent start");
  return g;
}

std::string_view clean_house_layout() { return kCleanHouseLayout; }

}  // namespace progsynth
