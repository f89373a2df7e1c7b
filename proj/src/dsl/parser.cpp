// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/dsl/parser.hpp"

#include <algorithm>

namespace progsynth::dsl {

Statement Statement::act(Action a) {
  Statement s;
  s.kind = Kind::kAction;
  s.action = a;
  return s;
}

Statement Statement::loop_while(Condition c, Block body) {
  Statement s;
  s.kind = Kind::kWhile;
  s.cond = c;
  s.body = std::move(body);
  return s;
}

Statement Statement::repeat(int n, Block body) {
  Statement s;
  s.kind = Kind::kRepeat;
  s.count = n;
  s.body = std::move(body);
  return s;
}

Statement Statement::when(Condition c, Block body) {
  Statement s;
  s.kind = Kind::kIf;
  s.cond = c;
  s.body = std::move(body);
  return s;
}

Statement Statement::when_else(Condition c, Block then_body, Block else_body) {
  Statement s;
  s.kind = Kind::kIfElse;
  s.cond = c;
  s.body = std::move(then_body);
  s.else_body = std::move(else_body);
  return s;
}

bool operator==(const Statement& a, const Statement& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Statement::Kind::kAction: return a.action == b.action;
    case Statement::Kind::kWhile:
    case Statement::Kind::kIf: return a.cond == b.cond && a.body == b.body;
    case Statement::Kind::kRepeat: return a.count == b.count && a.body == b.body;
    case Statement::Kind::kIfElse:
      return a.cond == b.cond && a.body == b.body && a.else_body == b.else_body;
  }
  return false;
}

bool evaluate(const Condition& cond, const Perception& p) {
  bool v = false;
  switch (cond.sensor) {
    case Sensor::kFrontIsClear: v = p.front_is_clear; break;
    case Sensor::kLeftIsClear: v = p.left_is_clear; break;
    case Sensor::kRightIsClear: v = p.right_is_clear; break;
    case Sensor::kMarkersPresent: v = p.markers_present; break;
    case Sensor::kNoMarkersPresent: v = p.no_markers_present; break;
  }
  return cond.negated ? !v : v;
}

namespace {

int number_block(Block& block, int next) {
  for (Statement& s : block) {
    s.id = next++;
    next = number_block(s.body, next);
    next = number_block(s.else_body, next);
  }
  return next;
}

int count_block(const Block& block) {
  int n = 0;
  for (const Statement& s : block) n += 1 + count_block(s.body) + count_block(s.else_body);
  return n;
}

int depth_block(const Block& block) {
  int d = 0;
  for (const Statement& s : block) {
    if (s.is_construct()) d = std::max(d, 1 + std::max(depth_block(s.body), depth_block(s.else_body)));
  }
  return d;
}

class Parser {
 public:
  explicit Parser(std::span<const Token> tokens) : tokens_(tokens) {}

  Program program() {
    expect(Token::kDef, "program must start with DEF");
    expect(Token::kRun, "expected 'run'");
    expect(Token::kMainOpen, "expected 'm('");
    Program p;
    p.body = block(Token::kMainClose);
    expect(Token::kMainClose, "expected 'm)'");
    if (pos_ != tokens_.size()) fail("trailing tokens after 'm)'");
    number_nodes(p);
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(static_cast<int>(pos_), message);
  }

  bool at_end() const { return pos_ >= tokens_.size(); }
  Token peek() const { return tokens_[pos_]; }

  void expect(Token t, const char* message) {
    if (at_end()) fail(std::string(message) + ", found end of input");
    if (peek() != t) fail(std::string(message) + ", found '" + std::string(token_text(peek())) + "'");
    ++pos_;
  }

  Block block(Token closer) {
    Block out;
    while (!at_end() && peek() != closer) out.push_back(statement());
    if (out.empty()) fail("block must contain at least one statement");
    return out;
  }

  Sensor sensor() {
    if (at_end() || !is_sensor(peek())) fail("expected a perception");
    const auto s = static_cast<Sensor>(index_of(peek()) - index_of(Token::kFrontIsClear));
    ++pos_;
    return s;
  }

  Condition condition() {
    expect(Token::kCondOpen, "expected 'c('");
    Condition c;
    if (!at_end() && peek() == Token::kNot) {
      ++pos_;
      expect(Token::kCondOpen, "expected 'c(' after 'not'");
      c.sensor = sensor();
      c.negated = true;
      expect(Token::kCondClose, "expected 'c)'");
    } else {
      c.sensor = sensor();
    }
    expect(Token::kCondClose, "expected 'c)'");
    return c;
  }

  Statement statement() {
    const Token t = peek();
    if (is_action(t)) {
      ++pos_;
      return Statement::act(static_cast<Action>(index_of(t) - index_of(Token::kMove)));
    }
    switch (t) {
      case Token::kWhile: {
        ++pos_;
        const Condition c = condition();
        expect(Token::kWhileOpen, "expected 'w('");
        Block body = block(Token::kWhileClose);
        expect(Token::kWhileClose, "expected 'w)'");
        return Statement::loop_while(c, std::move(body));
      }
      case Token::kRepeat: {
        ++pos_;
        if (at_end() || !is_count(peek())) fail("expected a repeat count R=n");
        const int n = count_value(peek());
        ++pos_;
        expect(Token::kRepeatOpen, "expected 'r('");
        Block body = block(Token::kRepeatClose);
        expect(Token::kRepeatClose, "expected 'r)'");
        return Statement::repeat(n, std::move(body));
      }
      case Token::kIf: {
        ++pos_;
        const Condition c = condition();
        expect(Token::kIfOpen, "expected 'i('");
        Block body = block(Token::kIfClose);
        expect(Token::kIfClose, "expected 'i)'");
        return Statement::when(c, std::move(body));
      }
      case Token::kIfElse: {
        ++pos_;
        const Condition c = condition();
        expect(Token::kIfOpen, "expected 'i('");
        Block then_body = block(Token::kIfClose);
        expect(Token::kIfClose, "expected 'i)'");
        expect(Token::kElse, "expected 'ELSE'");
        expect(Token::kElseOpen, "expected 'e('");
        Block else_body = block(Token::kElseClose);
        expect(Token::kElseClose, "expected 'e)'");
        return Statement::when_else(c, std::move(then_body), std::move(else_body));
      }
      default:
        fail("expected a statement, found '" + std::string(token_text(t)) + "'");
    }
  }

  std::span<const Token> tokens_;
  size_t pos_ = 0;
};

void emit_condition(const Condition& c, std::vector<Token>& out) {
  const Token sensor = token_at(index_of(Token::kFrontIsClear) + static_cast<int>(c.sensor));
  out.push_back(Token::kCondOpen);
  if (c.negated) {
    out.insert(out.end(), {Token::kNot, Token::kCondOpen, sensor, Token::kCondClose});
  } else {
    out.push_back(sensor);
  }
  out.push_back(Token::kCondClose);
}

void emit_block(const Block& block, std::vector<Token>& out, std::vector<TokenSpan>* spans = nullptr) {
  for (const Statement& s : block) {
    size_t slot = 0;
    if (spans) {
      slot = spans->size();
      spans->push_back({static_cast<int>(out.size()), 0});
    }
    switch (s.kind) {
      case Statement::Kind::kAction:
        out.push_back(token_at(index_of(Token::kMove) + static_cast<int>(s.action)));
        break;
      case Statement::Kind::kWhile:
        out.push_back(Token::kWhile);
        emit_condition(s.cond, out);
        out.push_back(Token::kWhileOpen);
        emit_block(s.body, out, spans);
        out.push_back(Token::kWhileClose);
        break;
      case Statement::Kind::kRepeat:
        out.push_back(Token::kRepeat);
        out.push_back(count_token(s.count));
        out.push_back(Token::kRepeatOpen);
        emit_block(s.body, out, spans);
        out.push_back(Token::kRepeatClose);
        break;
      case Statement::Kind::kIf:
        out.push_back(Token::kIf);
        emit_condition(s.cond, out);
        out.push_back(Token::kIfOpen);
        emit_block(s.body, out, spans);
        out.push_back(Token::kIfClose);
        break;
      case Statement::Kind::kIfElse:
        out.push_back(Token::kIfElse);
        emit_condition(s.cond, out);
        out.push_back(Token::kIfOpen);
        emit_block(s.body, out, spans);
        out.push_back(Token::kIfClose);
        out.push_back(Token::kElse);
        out.push_back(Token::kElseOpen);
        emit_block(s.else_body, out, spans);
        out.push_back(Token::kElseClose);
        break;
    }
    if (spans) (*spans)[slot].end = static_cast<int>(out.size());
  }
}

}  // namespace

int number_nodes(Program& program) { return number_block(program.body, 0); }
int count_statements(const Program& program) { return count_block(program.body); }
int construct_depth(const Program& program) { return depth_block(program.body); }

Program parse(std::span<const Token> tokens) { return Parser(tokens).program(); }

Program parse(std::string_view text) {
  const std::vector<Token> tokens = tokenize(text);
  return parse(tokens);
}

std::vector<Token> to_tokens(const Program& program) {
  std::vector<Token> out{Token::kDef, Token::kRun, Token::kMainOpen};
  emit_block(program.body, out);
  out.push_back(Token::kMainClose);
  return out;
}

std::string to_text(const Program& program) { return detokenize(to_tokens(program)); }

std::vector<TokenSpan> statement_spans(const Program& program) {
  std::vector<Token> out{Token::kDef, Token::kRun, Token::kMainOpen};
  std::vector<TokenSpan> spans;
  emit_block(program.body, out, &spans);
  return spans;
}

}  // namespace progsynth::dsl
