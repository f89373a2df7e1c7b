// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/world.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace progsynth {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kMove: return "move";
    case Action::kTurnLeft: return "turnLeft";
    case Action::kTurnRight: return "turnRight";
    case Action::kPickMarker: return "pickMarker";
    case Action::kPutMarker: return "putMarker";
  }
  return "?";
}

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kNorth: return "north";
    case Direction::kEast: return "east";
    case Direction::kSouth: return "south";
    case Direction::kWest: return "west";
  }
  return "?";
}

Cell direction_offset(Direction d) {
  static constexpr std::array<Cell, 4> kOffsets{{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};
  return kOffsets[static_cast<int>(d)];
}

Direction turned_left(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 3) % 4); }
Direction turned_right(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 1) % 4); }

GridState::GridState(int height, int width)
    : height_(height),
      width_(width),
      walls_(static_cast<size_t>(height) * width, 0),
      markers_(static_cast<size_t>(height) * width, 0),
      agent_row_(1),
      agent_col_(1) {
  if (height < 3 || width < 3) {
    throw std::invalid_argument("grid must be at least 3x3 to have an interior");
  }
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (is_boundary(r, c)) walls_[index(r, c)] = 1;
    }
  }
}

void GridState::set_wall(int row, int col, bool wall) {
  if (!in_bounds(row, col)) throw std::out_of_range("set_wall outside grid");
  if (!wall && is_boundary(row, col)) throw std::invalid_argument("boundary cells are always walls");
  walls_[index(row, col)] = wall ? 1 : 0;
}

void GridState::set_markers(int row, int col, int count) {
  if (!in_bounds(row, col)) throw std::out_of_range("set_markers outside grid");
  if (count < 0 || count > kMarkerCap) throw std::invalid_argument("marker count out of range");
  markers_[index(row, col)] = static_cast<uint8_t>(count);
}

int GridState::total_markers() const {
  return std::accumulate(markers_.begin(), markers_.end(), 0);
}

void GridState::set_agent(int row, int col, Direction dir) {
  if (!in_bounds(row, col)) throw std::out_of_range("agent outside grid");
  agent_row_ = row;
  agent_col_ = col;
  agent_dir_ = dir;
}

std::string GridState::validate() const {
  if (height_ < 3 || width_ < 3) return "grid smaller than 3x3";
  if (walls_.size() != static_cast<size_t>(height_) * width_ || markers_.size() != walls_.size()) {
    return "storage size mismatch";
  }
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (is_boundary(r, c) && !is_wall(r, c)) return "boundary cell is open";
      if (markers(r, c) > kMarkerCap) return "marker count above cap";
    }
  }
  if (!in_bounds(agent_row_, agent_col_)) return "agent out of bounds";
  if (is_wall(agent_row_, agent_col_)) return "agent on a wall";
  return {};
}

std::string GridState::render() const {
  static constexpr char kAgent[] = {'^', '>', 'v', '<'};
  std::ostringstream out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (r == agent_row_ && c == agent_col_) {
        out << kAgent[static_cast<int>(agent_dir_)];
      } else if (is_wall(r, c)) {
        out << '#';
      } else if (markers(r, c) > 0) {
        out << static_cast<char>('0' + std::min(markers(r, c), 9));
      } else {
        out << '.';
      }
    }
    out << '\n';
  }
  return out.str();
}

ActionFlags step_in_place(GridState& state, Action action) {
  ActionFlags flags;
  const Cell pos = state.agent();
  const Direction dir = state.agent_dir();
  switch (action) {
    case Action::kMove: {
      const Cell d = direction_offset(dir);
      const int nr = pos.row + d.row;
      const int nc = pos.col + d.col;
      if (!state.in_bounds(nr, nc) || state.is_wall(nr, nc)) {
        flags.blocked = true;
      } else {
        state.set_agent(nr, nc, dir);
      }
      break;
    }
    case Action::kTurnLeft:
      state.set_agent(pos.row, pos.col, turned_left(dir));
      break;
    case Action::kTurnRight:
      state.set_agent(pos.row, pos.col, turned_right(dir));
      break;
    case Action::kPickMarker: {
      const int n = state.markers(pos);
      if (n == 0) {
        flags.empty_pick = true;
      } else {
        state.set_markers(pos.row, pos.col, n - 1);
      }
      break;
    }
    case Action::kPutMarker: {
      const int n = state.markers(pos);
      if (n >= kMarkerCap) {
        flags.overflow = true;
      } else {
        state.set_markers(pos.row, pos.col, n + 1);
      }
      break;
    }
  }
  return flags;
}

StepResult apply_action(const GridState& state, Action action) {
  StepResult result{state, {}};
  result.flags = step_in_place(result.state, action);
  return result;
}

uint8_t Perception::bits() const {
  return static_cast<uint8_t>((front_is_clear ? 1 : 0) | (left_is_clear ? 2 : 0) |
                              (right_is_clear ? 4 : 0) | (markers_present ? 8 : 0) |
                              (no_markers_present ? 16 : 0));
}

Perception Perception::from_bits(uint8_t bits) {
  return {(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0, (bits & 16) != 0};
}

namespace {

bool clear_towards(const GridState& s, Direction d) {
  const Cell pos = s.agent();
  const Cell off = direction_offset(d);
  const int r = pos.row + off.row;
  const int c = pos.col + off.col;
  return s.in_bounds(r, c) && !s.is_wall(r, c);
}

}  // namespace

Perception perceive(const GridState& state) {
  Perception p;
  const Direction d = state.agent_dir();
  p.front_is_clear = clear_towards(state, d);
  p.left_is_clear = clear_towards(state, turned_left(d));
  p.right_is_clear = clear_towards(state, turned_right(d));
  p.markers_present = state.markers(state.agent()) > 0;
  p.no_markers_present = !p.markers_present;
  return p;
}

}  // namespace progsynth
