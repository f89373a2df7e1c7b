// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace progsynth::dsl {

/*!
 * \brief Closed program vocabulary. The numeric values are the stable indices
 * stored in checkpoints; append only.
 */
enum class Token : uint8_t {
  kDef = 0,
  kRun,
  kMainOpen,   // m(
  kMainClose,  // m)
  kMove,
  kTurnLeft,
  kTurnRight,
  kPickMarker,
  kPutMarker,
  kWhile,
  kRepeat,
  kIf,
  kIfElse,
  kElse,
  kNot,
  kCondOpen,     // c(
  kCondClose,    // c)
  kWhileOpen,    // w(
  kWhileClose,   // w)
  kIfOpen,       // i(
  kIfClose,      // i)
  kElseOpen,     // e(
  kElseClose,    // e)
  kRepeatOpen,   // r(
  kRepeatClose,  // r)
  kFrontIsClear,
  kLeftIsClear,
  kRightIsClear,
  kMarkersPresent,
  kNoMarkersPresent,
  kR0,  // R=0 ... R=19 follow contiguously
  kR19 = kR0 + 19,
  kPad,
  kStart,
  kEnd,
};

inline constexpr int kNumProgramTokens = static_cast<int>(Token::kR19) + 1;
inline constexpr int kVocabSize = static_cast<int>(Token::kEnd) + 1;
inline constexpr int kMaxRepeat = 19;

inline constexpr int index_of(Token t) { return static_cast<int>(t); }
inline constexpr Token token_at(int index) { return static_cast<Token>(index); }

inline constexpr bool is_action(Token t) { return t >= Token::kMove && t <= Token::kPutMarker; }
inline constexpr bool is_sensor(Token t) {
  return t >= Token::kFrontIsClear && t <= Token::kNoMarkersPresent;
}
inline constexpr bool is_count(Token t) { return t >= Token::kR0 && t <= Token::kR19; }
inline constexpr int count_value(Token t) { return static_cast<int>(t) - static_cast<int>(Token::kR0); }
inline constexpr Token count_token(int n) { return static_cast<Token>(static_cast<int>(Token::kR0) + n); }

std::string_view token_text(Token t);
std::optional<Token> token_from_text(std::string_view text);

/// Splits on whitespace and maps each word; throws ParseError at the first unknown word.
std::vector<Token> tokenize(std::string_view text);
/// Single-space-separated text.
std::string detokenize(const std::vector<Token>& tokens);

/// Fingerprint of the vocabulary index map, stored in checkpoints.
uint64_t vocab_hash();

}  // namespace progsynth::dsl
