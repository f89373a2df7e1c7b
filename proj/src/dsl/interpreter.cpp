// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/dsl/interpreter.hpp"

#include <algorithm>
#include <stdexcept>

namespace progsynth::dsl {

namespace {

class Executor {
 public:
  Executor(const GridState& init, int exec_cap, int statements)
      : state_(init),
        exec_cap_(exec_cap),
        node_cap_(static_cast<long>(std::max(exec_cap, 1)) * kNodeVisitsPerAction),
        seen_(static_cast<size_t>(statements) * 2, 0) {
    rollout_.initial_state = init;
  }

  Rollout finish(const Block& body) {
    run(body);
    for (size_t i = 0; i < seen_.size(); ++i) {
      if (seen_[i]) rollout_.branch_events.push_back({static_cast<int>(i / 2), (i % 2) == 1});
    }
    rollout_.terminated = stopped_ ? Termination::kStepCap : Termination::kProgramEnd;
    return std::move(rollout_);
  }

 private:
  bool visit() {
    if (++visits_ > node_cap_) stopped_ = true;
    return !stopped_;
  }

  bool check(const Statement& s) {
    const bool v = evaluate(s.cond, perceive(state_));
    seen_[static_cast<size_t>(s.id) * 2 + (v ? 1 : 0)] = 1;
    return v;
  }

  // Returns false once execution must stop.
  bool run(const Block& block) {
    for (const Statement& s : block) {
      if (!visit()) return false;
      switch (s.kind) {
        case Statement::Kind::kAction:
          if (static_cast<int>(rollout_.actions.size()) >= exec_cap_) {
            stopped_ = true;
            return false;
          }
          rollout_.perceptions.push_back(perceive(state_));
          rollout_.flags.push_back(step_in_place(state_, s.action));
          rollout_.actions.push_back(s.action);
          rollout_.action_nodes.push_back(s.id);
          break;
        case Statement::Kind::kWhile:
          while (true) {
            if (!check(s)) break;
            if (!run(s.body)) return false;
            if (!visit()) return false;
          }
          break;
        case Statement::Kind::kRepeat:
          for (int i = 0; i < s.count; ++i) {
            if (!run(s.body)) return false;
          }
          break;
        case Statement::Kind::kIf:
          if (check(s) && !run(s.body)) return false;
          break;
        case Statement::Kind::kIfElse:
          if (!run(check(s) ? s.body : s.else_body)) return false;
          break;
      }
    }
    return true;
  }

  GridState state_;
  int exec_cap_;
  long node_cap_;
  long visits_ = 0;
  bool stopped_ = false;
  std::vector<uint8_t> seen_;
  Rollout rollout_;
};

bool numbered(const Program& p) { return !p.body.empty() && p.body.front().id == 0; }

void collect_required(const Block& block, std::vector<BranchEvent>& out) {
  for (const Statement& s : block) {
    if (s.kind == Statement::Kind::kWhile || s.kind == Statement::Kind::kIf ||
        s.kind == Statement::Kind::kIfElse) {
      out.push_back({s.id, false});
      out.push_back({s.id, true});
    }
    collect_required(s.body, out);
    collect_required(s.else_body, out);
  }
}

}  // namespace

Rollout execute(const Program& program, const GridState& init, int exec_cap) {
  if (!numbered(program)) {
    Program copy = program;
    const int n = number_nodes(copy);
    return Executor(init, exec_cap, n).finish(copy.body);
  }
  return Executor(init, exec_cap, count_statements(program)).finish(program.body);
}

std::vector<BranchEvent> required_branches(const Program& program) {
  Program copy = program;
  number_nodes(copy);
  std::vector<BranchEvent> out;
  collect_required(copy.body, out);
  std::sort(out.begin(), out.end());
  return out;
}

double trace_match(std::span<const Action> a, std::span<const Action> b) {
  const size_t n = std::max(a.size(), b.size());
  if (n == 0) return 1.0;
  const size_t shared = std::min(a.size(), b.size());
  size_t prefix = 0;
  while (prefix < shared && a[prefix] == b[prefix]) ++prefix;
  return static_cast<double>(prefix) / static_cast<double>(n);
}

double r_mat(const Program& candidate, const Program& reference, std::span<const GridState> inits,
             int exec_cap) {
  if (inits.empty()) throw std::invalid_argument("r_mat needs at least one initial state");
  double total = 0.0;
  for (const GridState& s : inits) {
    const Rollout a = execute(candidate, s, exec_cap);
    const Rollout b = execute(reference, s, exec_cap);
    total += trace_match(a.actions, b.actions);
  }
  return total / static_cast<double>(inits.size());
}

}  // namespace progsynth::dsl
