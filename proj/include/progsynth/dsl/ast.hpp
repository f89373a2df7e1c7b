// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "progsynth/world.hpp"

namespace progsynth::dsl {

enum class Sensor : uint8_t {
  kFrontIsClear = 0,
  kLeftIsClear,
  kRightIsClear,
  kMarkersPresent,
  kNoMarkersPresent,
};

inline constexpr int kNumSensors = 5;

struct Condition {
  Sensor sensor = Sensor::kFrontIsClear;
  bool negated = false;
  friend bool operator==(const Condition&, const Condition&) = default;
};

bool evaluate(const Condition& cond, const Perception& p);

struct Statement;
using Block = std::vector<Statement>;

/*!
 * \brief One statement of the program tree.
 *
 * `body` is the loop / then-branch, `else_body` only used by kIfElse. `id` is
 * the pre-order index assigned by number_nodes(); it does not take part in
 * equality so hand-built trees compare equal to parsed ones.
 */
struct Statement {
  enum class Kind : uint8_t { kAction, kWhile, kRepeat, kIf, kIfElse };

  Kind kind = Kind::kAction;
  Action action = Action::kMove;
  Condition cond;
  int count = 0;
  Block body;
  Block else_body;
  int id = -1;

  static Statement act(Action a);
  static Statement loop_while(Condition c, Block body);
  static Statement repeat(int n, Block body);
  static Statement when(Condition c, Block body);
  static Statement when_else(Condition c, Block then_body, Block else_body);

  bool is_construct() const { return kind != Kind::kAction; }

  friend bool operator==(const Statement& a, const Statement& b);
};

struct Program {
  Block body;
  friend bool operator==(const Program&, const Program&) = default;
};

/// Assigns pre-order ids starting at 0; returns the number of statements.
int number_nodes(Program& program);
int count_statements(const Program& program);
/// Nesting depth of loop/conditional constructs (0 for straight-line code).
int construct_depth(const Program& program);

class ParseError : public std::runtime_error {
 public:
  ParseError(int index, const std::string& message)
      : std::runtime_error("token " + std::to_string(index) + ": " + message), index_(index) {}
  /// Index of the first offending token.
  int index() const { return index_; }

 private:
  int index_;
};

}  // namespace progsynth::dsl
