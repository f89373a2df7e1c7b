// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "progsynth/world.hpp"

namespace progsynth {
namespace {

GridState open_grid(int h = 6, int w = 6) { return GridState(h, w); }

TEST(World, BoundaryIsWall) {
  GridState g = open_grid(5, 7);
  for (int c = 0; c < 7; ++c) {
    EXPECT_TRUE(g.is_wall(0, c));
    EXPECT_TRUE(g.is_wall(4, c));
  }
  for (int r = 0; r < 5; ++r) {
    EXPECT_TRUE(g.is_wall(r, 0));
    EXPECT_TRUE(g.is_wall(r, 6));
  }
  EXPECT_FALSE(g.is_wall(2, 3));
  EXPECT_TRUE(g.valid()) << g.validate();
}

TEST(World, BlockedMoveKeepsPose) {
  GridState g = open_grid();
  g.set_agent(1, 1, Direction::kNorth);
  const StepResult r = apply_action(g, Action::kMove);
  EXPECT_TRUE(r.flags.blocked);
  EXPECT_EQ(r.state, g);
}

TEST(World, FourLeftTurnsIsIdentity) {
  GridState g = open_grid();
  g.set_agent(2, 3, Direction::kSouth);
  GridState s = g;
  for (int i = 0; i < 4; ++i) step_in_place(s, Action::kTurnLeft);
  EXPECT_EQ(s, g);
  for (int i = 0; i < 4; ++i) step_in_place(s, Action::kTurnRight);
  EXPECT_EQ(s, g);
}

TEST(World, TurnsRotateByQuarter) {
  EXPECT_EQ(turned_left(Direction::kNorth), Direction::kWest);
  EXPECT_EQ(turned_right(Direction::kNorth), Direction::kEast);
  EXPECT_EQ(turned_left(Direction::kEast), Direction::kNorth);
  EXPECT_EQ(turned_right(Direction::kWest), Direction::kNorth);
}

TEST(World, PickDecrementsOnce) {
  GridState g = open_grid();
  g.set_markers(1, 1, 2);
  const StepResult r = apply_action(g, Action::kPickMarker);
  EXPECT_EQ(r.state.markers(1, 1), 1);
  EXPECT_FALSE(r.flags.empty_pick);
}

TEST(World, EmptyPickAndOverflowAreFlaggedNoOps) {
  GridState g = open_grid();
  StepResult r = apply_action(g, Action::kPickMarker);
  EXPECT_TRUE(r.flags.empty_pick);
  EXPECT_EQ(r.state, g);

  g.set_markers(1, 1, kMarkerCap);
  r = apply_action(g, Action::kPutMarker);
  EXPECT_TRUE(r.flags.overflow);
  EXPECT_EQ(r.state.markers(1, 1), kMarkerCap);
}

TEST(World, MoveAdvancesAlongHeading) {
  GridState g = open_grid();
  g.set_agent(3, 3, Direction::kEast);
  GridState s = apply_action(g, Action::kMove).state;
  EXPECT_EQ(s.agent(), (Cell{3, 4}));
  s.set_agent(3, 3, Direction::kNorth);
  step_in_place(s, Action::kMove);
  EXPECT_EQ(s.agent(), (Cell{2, 3}));
}

TEST(Perceive, EnclosedAgentSeesNoOpenings) {
  GridState g = open_grid(5, 5);
  for (int r = 1; r < 4; ++r) {
    for (int c = 1; c < 4; ++c) g.set_wall(r, c, !(r == 2 && c == 2));
  }
  g.set_agent(2, 2, Direction::kEast);
  const Perception p = perceive(g);
  EXPECT_FALSE(p.front_is_clear);
  EXPECT_FALSE(p.left_is_clear);
  EXPECT_FALSE(p.right_is_clear);
}

TEST(Perceive, MarkerPresenceIsComplementary) {
  GridState g = open_grid();
  g.set_markers(1, 1, 1);
  Perception p = perceive(g);
  EXPECT_TRUE(p.markers_present);
  EXPECT_FALSE(p.no_markers_present);
  g.set_markers(1, 1, 0);
  p = perceive(g);
  EXPECT_FALSE(p.markers_present);
  EXPECT_TRUE(p.no_markers_present);
}

TEST(Perceive, DirectionRelativeOffsets) {
  GridState g = open_grid(5, 5);
  g.set_agent(2, 2, Direction::kEast);
  g.set_wall(1, 2, true);  // north = left when facing east
  Perception p = perceive(g);
  EXPECT_TRUE(p.front_is_clear);
  EXPECT_FALSE(p.left_is_clear);
  EXPECT_TRUE(p.right_is_clear);

  g.set_agent(2, 2, Direction::kWest);  // north is now on the right
  p = perceive(g);
  EXPECT_TRUE(p.left_is_clear);
  EXPECT_FALSE(p.right_is_clear);
}

TEST(Perceive, BitsRoundTrip) {
  for (int b = 0; b < 32; ++b) {
    const Perception p = Perception::from_bits(static_cast<uint8_t>(b));
    EXPECT_EQ(p.bits(), b);
  }
}

// Random walks over random worlds: every transition is deterministic and keeps
// the state valid.
TEST(WorldProperty, TransitionsAreTotalDeterministicAndValid) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    GridState g(8, 8);
    std::bernoulli_distribution wall(0.15);
    std::uniform_int_distribution<int> count(0, kMarkerCap);
    for (int r = 1; r < 7; ++r) {
      for (int c = 1; c < 7; ++c) {
        if (wall(gen) && !(r == 1 && c == 1)) {
          g.set_wall(r, c, true);
        } else {
          g.set_markers(r, c, count(gen) / 3);
        }
      }
    }
    std::uniform_int_distribution<int> act(0, kNumActions - 1);
    for (int t = 0; t < 100; ++t) {
      const Action a = static_cast<Action>(act(gen));
      const StepResult x = apply_action(g, a);
      const StepResult y = apply_action(g, a);
      ASSERT_EQ(x.state, y.state);
      ASSERT_EQ(x.flags, y.flags);
      ASSERT_TRUE(x.state.valid()) << x.state.validate();
      const Perception p = perceive(x.state);
      ASSERT_NE(p.markers_present, p.no_markers_present);
      g = x.state;
    }
  }
}

TEST(World, ValidateRejectsBrokenStates) {
  GridState g = open_grid();
  g.set_wall(2, 2, true);
  g.set_agent(2, 2, Direction::kNorth);
  EXPECT_FALSE(g.valid());
}

}  // namespace
}  // namespace progsynth
