// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace progsynth {

enum class Direction : uint8_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

enum class Action : uint8_t {
  kMove = 0,
  kTurnLeft = 1,
  kTurnRight = 2,
  kPickMarker = 3,
  kPutMarker = 4,
};

inline constexpr int kNumActions = 5;
inline constexpr int kMarkerCap = 10;

std::string_view action_name(Action a);
std::string_view direction_name(Direction d);

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Row/col offset of one step in direction `d`. Row 0 is the northern edge.
Cell direction_offset(Direction d);
Direction turned_left(Direction d);
Direction turned_right(Direction d);

/*!
 * \brief A full Karel world: walls, per-cell marker counts and the agent pose.
 *
 * The outermost ring of cells is always wall, so an H x W grid has an
 * (H-2) x (W-2) interior. Value type; copying is cheap for the grid sizes used here.
 */
class GridState {
 public:
  GridState() = default;
  /// Enclosed grid with an open interior and the agent at (1, 1) facing east.
  GridState(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }

  bool in_bounds(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  bool is_wall(int row, int col) const { return walls_[index(row, col)] != 0; }
  bool is_wall(Cell c) const { return is_wall(c.row, c.col); }
  /// Boundary cells cannot be opened.
  void set_wall(int row, int col, bool wall);

  int markers(int row, int col) const { return markers_[index(row, col)]; }
  int markers(Cell c) const { return markers(c.row, c.col); }
  void set_markers(int row, int col, int count);
  int total_markers() const;

  Cell agent() const { return {agent_row_, agent_col_}; }
  Direction agent_dir() const { return agent_dir_; }
  void set_agent(int row, int col, Direction dir);

  bool is_boundary(int row, int col) const {
    return row == 0 || col == 0 || row == height_ - 1 || col == width_ - 1;
  }

  /// Checks every structural invariant; returns an empty string when valid.
  std::string validate() const;
  bool valid() const { return validate().empty(); }

  /// Multi-line picture: '#' wall, '.' open, digit marker count, ^>v< agent.
  std::string render() const;

  friend bool operator==(const GridState&, const GridState&) = default;

 private:
  size_t index(int row, int col) const { return static_cast<size_t>(row) * width_ + col; }

  int height_ = 0;
  int width_ = 0;
  std::vector<uint8_t> walls_;
  std::vector<uint8_t> markers_;
  int agent_row_ = 0;
  int agent_col_ = 0;
  Direction agent_dir_ = Direction::kEast;
};

/// Flags raised by degenerate actions. All-false means the action had its full effect.
struct ActionFlags {
  bool blocked = false;
  bool empty_pick = false;
  bool overflow = false;
  friend bool operator==(const ActionFlags&, const ActionFlags&) = default;
};

/// In-place transition. Total: degenerate actions leave the state unchanged and set a flag.
ActionFlags step_in_place(GridState& state, Action action);

struct StepResult {
  GridState state;
  ActionFlags flags;
};

StepResult apply_action(const GridState& state, Action action);

struct Perception {
  bool front_is_clear = false;
  bool left_is_clear = false;
  bool right_is_clear = false;
  bool markers_present = false;
  bool no_markers_present = true;

  /// Bit i set for field i in declaration order.
  uint8_t bits() const;
  static Perception from_bits(uint8_t bits);
  friend bool operator==(const Perception&, const Perception&) = default;
};

Perception perceive(const GridState& state);

}  // namespace progsynth
