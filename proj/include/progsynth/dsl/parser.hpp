// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "progsynth/dsl/ast.hpp"
#include "progsynth/dsl/token.hpp"

namespace progsynth::dsl {

/// LL(1) parse of a complete `DEF run m( ... m)` program. Throws ParseError.
Program parse(std::span<const Token> tokens);
Program parse(std::string_view text);

/// Canonical token form; parse(to_tokens(p)) == p.
std::vector<Token> to_tokens(const Program& program);
/// Canonical single-line text, e.g. "DEF run m( move m)".
std::string to_text(const Program& program);

/// Half-open token range [begin, end) of one statement within to_tokens().
struct TokenSpan {
  int begin = 0;
  int end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// Span of every statement, indexed by pre-order statement id.
std::vector<TokenSpan> statement_spans(const Program& program);

}  // namespace progsynth::dsl
