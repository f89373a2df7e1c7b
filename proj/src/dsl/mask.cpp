// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/dsl/mask.hpp"

namespace progsynth::dsl {

namespace {

// Grammar nonterminals share the stack with terminal token indices.
enum : uint8_t {
  kStmts = 64,  // Stmt Tail
  kTail,        // Stmt Tail | <empty>
  kStmt,
  kCond,        // c( CondRest
  kCondRest,    // Sensor c) | not c( Sensor c) c)
  kSensor,
  kCount,
};

constexpr uint8_t T(Token t) { return static_cast<uint8_t>(t); }

bool starts_statement(Token t) {
  return is_action(t) || t == Token::kWhile || t == Token::kRepeat || t == Token::kIf ||
         t == Token::kIfElse;
}

int min_length(uint8_t sym) {
  switch (sym) {
    case kStmts: return 1;
    case kTail: return 0;
    case kStmt: return 1;
    case kCond: return 3;
    case kCondRest: return 2;
    case kSensor: return 1;
    case kCount: return 1;
    default: return sym == T(Token::kEnd) ? 0 : 1;
  }
}

}  // namespace

MaskState::MaskState(int max_tokens, int max_depth) : max_tokens_(max_tokens), max_depth_(max_depth) {
  stack_ = {T(Token::kEnd), T(Token::kMainClose), kStmts, T(Token::kMainOpen), T(Token::kRun),
            T(Token::kDef)};
}

int MaskState::depth() const {
  int d = 0;
  for (size_t i = 0; i < stack_.size(); ++i) {
    const uint8_t s = stack_[i];
    if (s == T(Token::kWhileClose) || s == T(Token::kRepeatClose) || s == T(Token::kElseClose)) {
      ++d;
    } else if (s == T(Token::kIfClose)) {
      // The then-branch of an IFELSE is already counted through its e).
      if (i == 0 || stack_[i - 1] != T(Token::kElse)) ++d;
    }
  }
  return d;
}

int MaskState::min_remaining() const {
  int n = 0;
  for (uint8_t s : stack_) n += min_length(s);
  return n;
}

bool MaskState::try_step(Token t) {
  while (!stack_.empty()) {
    const uint8_t top = stack_.back();
    if (top < kStmts) {
      if (top != T(t)) return false;
      stack_.pop_back();
      if (t != Token::kEnd) ++length_;
      return true;
    }
    switch (top) {
      case kStmts:
        stack_.back() = kTail;
        stack_.push_back(kStmt);
        break;
      case kTail:
        if (starts_statement(t)) {
          stack_.push_back(kStmt);
        } else {
          stack_.pop_back();
        }
        break;
      case kStmt: {
        stack_.pop_back();
        if (is_action(t)) {
          stack_.push_back(T(t));
          break;
        }
        if (!starts_statement(t) || depth() + 1 > max_depth_) return false;
        switch (t) {
          case Token::kWhile:
            stack_.insert(stack_.end(), {T(Token::kWhileClose), kStmts, T(Token::kWhileOpen), kCond,
                                         T(Token::kWhile)});
            break;
          case Token::kRepeat:
            stack_.insert(stack_.end(), {T(Token::kRepeatClose), kStmts, T(Token::kRepeatOpen), kCount,
                                         T(Token::kRepeat)});
            break;
          case Token::kIf:
            stack_.insert(stack_.end(),
                          {T(Token::kIfClose), kStmts, T(Token::kIfOpen), kCond, T(Token::kIf)});
            break;
          default:  // IFELSE
            stack_.insert(stack_.end(), {T(Token::kElseClose), kStmts, T(Token::kElseOpen), T(Token::kElse),
                                         T(Token::kIfClose), kStmts, T(Token::kIfOpen), kCond,
                                         T(Token::kIfElse)});
            break;
        }
        break;
      }
      case kCond:
        stack_.back() = kCondRest;
        stack_.push_back(T(Token::kCondOpen));
        break;
      case kCondRest:
        stack_.pop_back();
        if (t == Token::kNot) {
          stack_.insert(stack_.end(), {T(Token::kCondClose), T(Token::kCondClose), kSensor,
                                       T(Token::kCondOpen), T(Token::kNot)});
        } else {
          stack_.insert(stack_.end(), {T(Token::kCondClose), kSensor});
        }
        break;
      case kSensor:
        if (!is_sensor(t)) return false;
        stack_.pop_back();
        ++length_;
        return true;
      case kCount:
        if (!is_count(t)) return false;
        stack_.pop_back();
        ++length_;
        return true;
      default:
        return false;
    }
  }
  return false;
}

bool MaskState::is_legal(Token t) const {
  if (t == Token::kPad || t == Token::kStart) return false;
  MaskState next = *this;
  if (!next.try_step(t)) return false;
  return next.length_ + next.min_remaining() <= max_tokens_;
}

TokenSet MaskState::legal_tokens() const {
  TokenSet out;
  for (int i = 0; i < kVocabSize; ++i) {
    if (is_legal(token_at(i))) out.set(i);
  }
  return out;
}

std::array<double, kVocabSize> MaskState::additive_mask() const {
  std::array<double, kVocabSize> m{};
  const TokenSet legal = legal_tokens();
  for (int i = 0; i < kVocabSize; ++i) {
    m[i] = legal.test(i) ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return m;
}

void MaskState::step(Token t) {
  MaskState next = *this;
  if (t == Token::kPad || t == Token::kStart || !next.try_step(t) ||
      next.length_ + next.min_remaining() > max_tokens_) {
    throw MaskError("illegal token '" + std::string(token_text(t)) + "' at position " +
                    std::to_string(length_));
  }
  *this = std::move(next);
}

bool accepts(const std::vector<Token>& tokens, int max_tokens, int max_depth) {
  MaskState ms(max_tokens, max_depth);
  for (Token t : tokens) {
    if (!ms.is_legal(t)) return false;
    ms.step(t);
  }
  if (ms.done()) return true;
  return ms.is_legal(Token::kEnd);
}

}  // namespace progsynth::dsl
