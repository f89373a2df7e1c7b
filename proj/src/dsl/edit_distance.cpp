// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/dsl/edit_distance.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace progsynth::dsl {

namespace {

// Post-order flattening used by the Zhang-Shasha recurrence.
struct Flat {
  std::vector<std::string> label;
  std::vector<int> leftmost;  // post-order index of the leftmost leaf below each node
  std::vector<int> keyroots;
};

std::string header(const Statement& s) {
  const auto cond = [&] { return std::to_string(static_cast<int>(s.cond.sensor)) + (s.cond.negated ? "!" : ""); };
  switch (s.kind) {
    case Statement::Kind::kAction: return "A" + std::to_string(static_cast<int>(s.action));
    case Statement::Kind::kWhile: return "W" + cond();
    case Statement::Kind::kRepeat: return "R" + std::to_string(s.count);
    case Statement::Kind::kIf: return "I" + cond();
    case Statement::Kind::kIfElse: return "IE" + cond();
  }
  return {};
}

int flatten_block(const Block& block, Flat& f);

int add_node(std::string label, int first_leaf, Flat& f) {
  f.label.push_back(std::move(label));
  f.leftmost.push_back(first_leaf);
  return static_cast<int>(f.label.size()) - 1;
}

// Returns the leftmost leaf of the subtree, or -1 for an empty block.
int flatten_statement(const Statement& s, Flat& f) {
  const int next = static_cast<int>(f.label.size());
  int first = flatten_block(s.body, f);
  if (s.kind == Statement::Kind::kIfElse) {
    const int else_next = static_cast<int>(f.label.size());
    const int else_first = flatten_block(s.else_body, f);
    add_node("ELSE", else_first < 0 ? else_next : else_first, f);
    if (first < 0) first = else_next;
  }
  add_node(header(s), first < 0 ? next : first, f);
  return f.leftmost.back();
}

int flatten_block(const Block& block, Flat& f) {
  int first = -1;
  for (const Statement& s : block) {
    const int l = flatten_statement(s, f);
    if (first < 0) first = l;
  }
  return first;
}

Flat flatten(const Program& p) {
  Flat f;
  const int first = flatten_block(p.body, f);
  add_node("ROOT", first < 0 ? 0 : first, f);
  const int n = static_cast<int>(f.label.size());
  // Keyroots: the highest node for each distinct leftmost leaf.
  std::vector<int> highest(n, -1);
  for (int i = 0; i < n; ++i) highest[f.leftmost[i]] = i;
  for (int i = 0; i < n; ++i) {
    if (highest[i] >= 0) f.keyroots.push_back(highest[i]);
  }
  std::sort(f.keyroots.begin(), f.keyroots.end());
  return f;
}

}  // namespace

int statement_edit_distance(const Program& a, const Program& b) {
  const Flat x = flatten(a);
  const Flat y = flatten(b);
  const int n = static_cast<int>(x.label.size());
  const int m = static_cast<int>(y.label.size());
  std::vector<std::vector<int>> tree(n, std::vector<int>(m, 0));
  std::vector<std::vector<int>> forest(n + 1, std::vector<int>(m + 1, 0));

  for (int i : x.keyroots) {
    for (int j : y.keyroots) {
      const int li = x.leftmost[i];
      const int lj = y.leftmost[j];
      // forest[p][q]: distance between x[li..li+p-1] and y[lj..lj+q-1].
      const int rows = i - li + 1;
      const int cols = j - lj + 1;
      forest[0][0] = 0;
      for (int p = 1; p <= rows; ++p) forest[p][0] = forest[p - 1][0] + 1;
      for (int q = 1; q <= cols; ++q) forest[0][q] = forest[0][q - 1] + 1;
      for (int p = 1; p <= rows; ++p) {
        for (int q = 1; q <= cols; ++q) {
          const int xi = li + p - 1;
          const int yj = lj + q - 1;
          const int del = forest[p - 1][q] + 1;
          const int ins = forest[p][q - 1] + 1;
          if (x.leftmost[xi] == li && y.leftmost[yj] == lj) {
            const int rel = forest[p - 1][q - 1] + (x.label[xi] == y.label[yj] ? 0 : 1);
            forest[p][q] = std::min({del, ins, rel});
            tree[xi][yj] = forest[p][q];
          } else {
            const int p0 = x.leftmost[xi] - li;
            const int q0 = y.leftmost[yj] - lj;
            forest[p][q] = std::min({del, ins, forest[p0][q0] + tree[xi][yj]});
          }
        }
      }
    }
  }
  return tree[n - 1][m - 1];
}

}  // namespace progsynth::dsl
