// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/dsl/token.hpp"

#include <array>
#include <cctype>
#include <string>

#include "progsynth/dsl/ast.hpp"
#include "progsynth/rng.hpp"

namespace progsynth::dsl {

namespace {

const std::array<std::string, kVocabSize>& texts() {
  static const std::array<std::string, kVocabSize> kTexts = [] {
    std::array<std::string, kVocabSize> t{};
    const char* fixed[] = {"DEF", "run", "m(", "m)", "move", "turnLeft", "turnRight", "pickMarker",
                           "putMarker", "WHILE", "REPEAT", "IF", "IFELSE", "ELSE", "not", "c(",
                           "c)", "w(", "w)", "i(", "i)", "e(", "e)", "r(", "r)", "frontIsClear",
                           "leftIsClear", "rightIsClear", "markersPresent", "noMarkersPresent"};
    int i = 0;
    for (const char* s : fixed) t[i++] = s;
    for (int n = 0; n <= kMaxRepeat; ++n) t[i++] = "R=" + std::to_string(n);
    t[index_of(Token::kPad)] = "<pad>";
    t[index_of(Token::kStart)] = "<start>";
    t[index_of(Token::kEnd)] = "<end>";
    return t;
  }();
  return kTexts;
}

}  // namespace

std::string_view token_text(Token t) { return texts()[index_of(t)]; }

std::optional<Token> token_from_text(std::string_view text) {
  const auto& t = texts();
  for (int i = 0; i < kNumProgramTokens; ++i) {
    if (t[i] == text) return token_at(i);
  }
  return std::nullopt;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const std::string_view word = text.substr(i, j - i);
    auto tok = token_from_text(word);
    if (!tok) {
      throw ParseError(static_cast<int>(out.size()), "unknown token '" + std::string(word) + "'");
    }
    out.push_back(*tok);
    i = j;
  }
  return out;
}

std::string detokenize(const std::vector<Token>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += token_text(tokens[i]);
  }
  return out;
}

uint64_t vocab_hash() {
  uint64_t h = fnv1a("progsynth-vocab-v1");
  for (const auto& s : texts()) {
    h = fnv1a(s, h);
    h = fnv1a("\n", h);
  }
  return h;
}

}  // namespace progsynth::dsl
