// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "progsynth/dsl/token.hpp"

namespace progsynth::dsl {

inline constexpr int kMaxProgramTokens = 45;
inline constexpr int kMaxConstructDepth = 4;

using TokenSet = std::bitset<kVocabSize>;

class MaskError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/*!
 * \brief Grammar automaton over token prefixes for syntax-constrained decoding.
 *
 * The state is an LL(1) prediction stack plus a token counter. A token is
 * legal when the grammar admits it and the shortest completion of the
 * resulting prefix still fits in `max_tokens` (the trailing <end> symbol is
 * not counted). Every reachable state has at least one legal token until
 * <end> has been consumed.
 */
class MaskState {
 public:
  explicit MaskState(int max_tokens = kMaxProgramTokens, int max_depth = kMaxConstructDepth);

  TokenSet legal_tokens() const;
  /// 0 for legal entries, -inf otherwise; added to decoder logits before the softmax.
  std::array<double, kVocabSize> additive_mask() const;
  bool is_legal(Token t) const;

  /// Throws MaskError for an illegal transition.
  void step(Token t);

  /// True once <end> has been consumed.
  bool done() const { return stack_.empty(); }
  int length() const { return length_; }
  /// Open loop/conditional blocks at this point of the prefix.
  int depth() const;
  /// Fewest tokens still needed to close the program (excluding <end>).
  int min_remaining() const;

 private:
  bool try_step(Token t);

  std::vector<uint8_t> stack_;  // back() is the top
  int length_ = 0;
  int max_tokens_;
  int max_depth_;
};

inline MaskState mask_init() { return MaskState(); }
inline MaskState mask_step(MaskState ms, Token t) {
  ms.step(t);
  return ms;
}
inline TokenSet legal_tokens(const MaskState& ms) { return ms.legal_tokens(); }

/// Runs the automaton over a full program (optionally followed by <end>).
bool accepts(const std::vector<Token>& tokens, int max_tokens = kMaxProgramTokens,
             int max_depth = kMaxConstructDepth);

}  // namespace progsynth::dsl
