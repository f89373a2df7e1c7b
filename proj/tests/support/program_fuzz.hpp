// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

// Text-level random program generator for fuzz tests. Produces programs in the
// wire format without going through the library's AST or sampler.

#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fuzz {

inline const char* const kActions[] = {"move", "turnLeft", "turnRight", "pickMarker", "putMarker"};
inline const char* const kSensors[] = {"frontIsClear", "leftIsClear", "rightIsClear", "markersPresent",
                                       "noMarkersPresent"};

class ProgramFuzzer {
 public:
  explicit ProgramFuzzer(uint64_t seed) : gen_(seed) {}

  /// Random program with at most `max_tokens` tokens and construct depth <= 4.
  std::string program(int max_tokens) {
    while (true) {
      std::vector<std::string> out = {"DEF", "run", "m("};
      block(out, 0);
      out.push_back("m)");
      if (static_cast<int>(out.size()) <= max_tokens) return join(out);
    }
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen_); }

  void cond(std::vector<std::string>& out) {
    out.push_back("c(");
    if (pick(4) == 0) {
      out.insert(out.end(), {"not", "c(", kSensors[pick(5)], "c)"});
    } else {
      out.push_back(kSensors[pick(5)]);
    }
    out.push_back("c)");
  }

  void block(std::vector<std::string>& out, int depth) {
    const int n = 1 + pick(3);
    for (int i = 0; i < n; ++i) statement(out, depth);
  }

  void statement(std::vector<std::string>& out, int depth) {
    const int k = depth >= 4 ? 0 : pick(9);
    if (k <= 4) {
      out.push_back(kActions[pick(5)]);
    } else if (k == 5) {
      out.push_back("WHILE");
      cond(out);
      out.push_back("w(");
      block(out, depth + 1);
      out.push_back("w)");
    } else if (k == 6) {
      out.push_back("REPEAT");
      out.push_back("R=" + std::to_string(pick(20)));
      out.push_back("r(");
      block(out, depth + 1);
      out.push_back("r)");
    } else if (k == 7) {
      out.push_back("IF");
      cond(out);
      out.push_back("i(");
      block(out, depth + 1);
      out.push_back("i)");
    } else {
      out.push_back("IFELSE");
      cond(out);
      out.push_back("i(");
      block(out, depth + 1);
      out.push_back("i)");
      out.insert(out.end(), {"ELSE", "e("});
      block(out, depth + 1);
      out.push_back("e)");
    }
  }

  static std::string join(const std::vector<std::string>& words) {
    std::string s;
    for (size_t i = 0; i < words.size(); ++i) {
      if (i) s += ' ';
      s += words[i];
    }
    return s;
  }

  std::mt19937_64 gen_;
};

/// Raw description of a random enclosed world, convertible into either interpreter's state.
struct RawWorld {
  int rows = 8;
  int cols = 8;
  std::vector<std::vector<bool>> wall;
  std::vector<std::vector<int>> marker;
  int r = 1;
  int c = 1;
  int heading = 1;
};

inline RawWorld random_world(uint64_t seed, int rows = 8, int cols = 8) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RawWorld w;
  w.rows = rows;
  w.cols = cols;
  w.wall.assign(rows, std::vector<bool>(cols, false));
  w.marker.assign(rows, std::vector<int>(cols, 0));
  std::vector<std::pair<int, int>> free;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool edge = r == 0 || c == 0 || r == rows - 1 || c == cols - 1;
      w.wall[r][c] = edge || u(gen) < 0.15;
      if (!w.wall[r][c]) {
        free.emplace_back(r, c);
        if (u(gen) < 0.25) w.marker[r][c] = 1 + static_cast<int>(u(gen) * 3);
      }
    }
  }
  if (free.empty()) {
    w.wall[1][1] = false;
    free.emplace_back(1, 1);
  }
  const auto [ar, ac] = free[static_cast<size_t>(u(gen) * free.size()) % free.size()];
  w.r = ar;
  w.c = ac;
  w.heading = static_cast<int>(u(gen) * 4) % 4;
  return w;
}

}  // namespace fuzz
