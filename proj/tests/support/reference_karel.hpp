// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

// Naive reference Karel interpreter used as a test oracle. It parses the
// program text itself and simulates its own world; it shares no code with
// the library.

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reference {

struct World {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<bool>> wall;
  std::vector<std::vector<int>> marker;
  int r = 0;
  int c = 0;
  int heading = 0;  // 0 north, 1 east, 2 south, 3 west

  bool open(int rr, int cc) const {
    return rr >= 0 && cc >= 0 && rr < rows && cc < cols && !wall[rr][cc];
  }
  bool clear_towards(int h) const {
    static const int dr[4] = {-1, 0, 1, 0};
    static const int dc[4] = {0, 1, 0, -1};
    return open(r + dr[h], c + dc[h]);
  }
  bool sense(const std::string& name) const {
    if (name == "frontIsClear") return clear_towards(heading);
    if (name == "leftIsClear") return clear_towards((heading + 3) % 4);
    if (name == "rightIsClear") return clear_towards((heading + 1) % 4);
    if (name == "markersPresent") return marker[r][c] > 0;
    if (name == "noMarkersPresent") return marker[r][c] == 0;
    throw std::runtime_error("unknown sensor " + name);
  }
  void act(const std::string& name) {
    static const int dr[4] = {-1, 0, 1, 0};
    static const int dc[4] = {0, 1, 0, -1};
    if (name == "move") {
      if (open(r + dr[heading], c + dc[heading])) {
        r += dr[heading];
        c += dc[heading];
      }
    } else if (name == "turnLeft") {
      heading = (heading + 3) % 4;
    } else if (name == "turnRight") {
      heading = (heading + 1) % 4;
    } else if (name == "pickMarker") {
      if (marker[r][c] > 0) marker[r][c] -= 1;
    } else if (name == "putMarker") {
      if (marker[r][c] < 10) marker[r][c] += 1;
    } else {
      throw std::runtime_error("unknown action " + name);
    }
  }
};

struct Node {
  std::string kind;  // action name, WHILE, REPEAT, IF, IFELSE
  std::string sensor;
  bool negate = false;
  int times = 0;
  std::vector<Node> then_part;
  std::vector<Node> else_part;
};

class Interpreter {
 public:
  Interpreter(const std::string& text, int max_actions)
      : max_actions_(max_actions), max_visits_(static_cast<long>(max_actions) * 100) {
    std::istringstream in(text);
    for (std::string w; in >> w;) words_.push_back(w);
    at_ = 3;  // DEF run m(
    program_ = read_list("m)");
  }

  std::vector<std::string> run(World world) {
    world_ = std::move(world);
    trace_.clear();
    visits_ = 0;
    halted_ = false;
    walk(program_);
    return trace_;
  }

 private:
  std::vector<Node> read_list(const std::string& close) {
    std::vector<Node> out;
    while (words_.at(at_) != close) out.push_back(read_one());
    ++at_;
    return out;
  }

  void read_cond(Node& n) {
    ++at_;  // c(
    if (words_.at(at_) == "not") {
      n.negate = true;
      at_ += 2;  // not c(
      n.sensor = words_.at(at_++);
      ++at_;  // c)
    } else {
      n.sensor = words_.at(at_++);
    }
    ++at_;  // c)
  }

  Node read_one() {
    Node n;
    n.kind = words_.at(at_++);
    if (n.kind == "WHILE") {
      read_cond(n);
      ++at_;
      n.then_part = read_list("w)");
    } else if (n.kind == "REPEAT") {
      n.times = std::stoi(words_.at(at_++).substr(2));
      ++at_;
      n.then_part = read_list("r)");
    } else if (n.kind == "IF") {
      read_cond(n);
      ++at_;
      n.then_part = read_list("i)");
    } else if (n.kind == "IFELSE") {
      read_cond(n);
      ++at_;
      n.then_part = read_list("i)");
      at_ += 2;  // ELSE e(
      n.else_part = read_list("e)");
    }
    return n;
  }

  bool test(const Node& n) const { return world_.sense(n.sensor) != n.negate; }

  bool tick() {
    visits_ += 1;
    if (visits_ > max_visits_) halted_ = true;
    return !halted_;
  }

  void walk(const std::vector<Node>& list) {
    for (const Node& n : list) {
      if (halted_ || !tick()) return;
      if (n.kind == "WHILE") {
        while (!halted_ && test(n)) {
          walk(n.then_part);
          if (halted_ || !tick()) return;
        }
      } else if (n.kind == "REPEAT") {
        for (int i = 0; i < n.times && !halted_; ++i) walk(n.then_part);
      } else if (n.kind == "IF") {
        if (test(n)) walk(n.then_part);
      } else if (n.kind == "IFELSE") {
        walk(test(n) ? n.then_part : n.else_part);
      } else {
        if (static_cast<int>(trace_.size()) == max_actions_) {
          halted_ = true;
          return;
        }
        world_.act(n.kind);
        trace_.push_back(n.kind);
      }
      if (halted_) return;
    }
  }

  std::vector<std::string> words_;
  size_t at_ = 0;
  std::vector<Node> program_;
  World world_;
  std::vector<std::string> trace_;
  int max_actions_;
  long max_visits_;
  long visits_ = 0;
  bool halted_ = false;
};

}  // namespace reference
