// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "json.hpp"
#include "progsynth/dsl/parser.hpp"
#include "support/program_fuzz.hpp"

namespace progsynth::dsl {
namespace {

std::vector<std::string> corpus() {
  std::ifstream in(std::string(PROGSYNTH_DATA_DIR) + "/reference_programs.json");
  const nlohmann::json j = nlohmann::json::parse(in);
  std::vector<std::string> out;
  for (const auto& group : {"reconstruction", "tasks"}) {
    for (const auto& [name, text] : j.at(group).items()) out.push_back(text.get<std::string>());
  }
  return out;
}

TEST(Vocabulary, SizeAndStableIndices) {
  EXPECT_EQ(kNumProgramTokens, 50);
  EXPECT_EQ(kVocabSize, 53);
  std::set<std::string> seen;
  for (int i = 0; i < kVocabSize; ++i) {
    const std::string text(token_text(token_at(i)));
    EXPECT_TRUE(seen.insert(text).second) << text;
    if (i < kNumProgramTokens) {
      ASSERT_TRUE(token_from_text(text).has_value()) << text;
      EXPECT_EQ(index_of(*token_from_text(text)), i);
    }
  }
  EXPECT_EQ(token_text(Token::kDef), "DEF");
  EXPECT_EQ(token_text(Token::kR19), "R=19");
  EXPECT_EQ(vocab_hash(), vocab_hash());
}

TEST(Tokenize, ReportsUnknownWordIndex) {
  try {
    tokenize("DEF run m( jump m)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.index(), 3);
  }
}

TEST(Parse, MinimalProgram) {
  const Program p = parse("DEF run m( move m)");
  ASSERT_EQ(p.body.size(), 1u);
  EXPECT_EQ(p.body[0], Statement::act(Action::kMove));
}

TEST(Parse, WhileLoop) {
  const Program p = parse("DEF run m( WHILE c( frontIsClear c) w( move w) m)");
  const Program want{{Statement::loop_while({Sensor::kFrontIsClear, false}, {Statement::act(Action::kMove)})}};
  EXPECT_EQ(p, want);
}

TEST(Parse, NegatedConditionAndIfElse) {
  const Program p = parse(
      "DEF run m( IFELSE c( not c( markersPresent c) c) i( putMarker i) ELSE e( pickMarker e) m)");
  const Program want{{Statement::when_else({Sensor::kMarkersPresent, true}, {Statement::act(Action::kPutMarker)},
                                           {Statement::act(Action::kPickMarker)})}};
  EXPECT_EQ(p, want);
}

TEST(Parse, ErrorIndices) {
  const std::pair<const char*, int> cases[] = {
      {"DEF run m( WHILE move m)", 4},
      {"run m( move m)", 0},
      {"DEF run m( m)", 3},
      {"DEF run m( move", 4},
      {"DEF run m( move m) move", 5},
      {"DEF run m( REPEAT move r( move r) m)", 4},
      {"DEF run m( IF c( frontIsClear c) i( move w) m)", 9},
      {"DEF run m( IFELSE c( frontIsClear c) i( move i) e( move e) m)", 10},
      {"DEF run m( WHILE c( not frontIsClear c) w( move w) m)", 6},
  };
  for (const auto& [text, index] : cases) {
    try {
      parse(std::string_view(text));
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.index(), index) << text << " -> " << e.what();
    }
  }
}

TEST(Print, CanonicalText) {
  EXPECT_EQ(to_text(Program{{Statement::act(Action::kMove)}}), "DEF run m( move m)");
  EXPECT_EQ(to_text(Program{{Statement::repeat(2, {Statement::act(Action::kMove)})}}),
            "DEF run m( REPEAT R=2 r( move r) m)");
}

TEST(RoundTrip, CorpusIsVerbatim) {
  for (const std::string& text : corpus()) EXPECT_EQ(to_text(parse(text)), text);
}

TEST(RoundTrip, FuzzedPrograms) {
  fuzz::ProgramFuzzer f(21);
  for (int i = 0; i < 1000; ++i) {
    const std::string text = f.program(60);
    const Program p = parse(text);
    EXPECT_EQ(to_text(p), text);
    EXPECT_EQ(parse(to_text(p)), p);
  }
}

TEST(Ast, NumberingCountAndDepth) {
  Program p = parse(
      "DEF run m( WHILE c( frontIsClear c) w( IF c( markersPresent c) i( pickMarker i) move w) turnLeft m)");
  EXPECT_EQ(number_nodes(p), 5);
  EXPECT_EQ(count_statements(p), 5);
  EXPECT_EQ(construct_depth(p), 2);
  EXPECT_EQ(p.body[0].id, 0);
  EXPECT_EQ(p.body[0].body[0].id, 1);
  EXPECT_EQ(p.body[0].body[0].body[0].id, 2);
  EXPECT_EQ(p.body[0].body[1].id, 3);
  EXPECT_EQ(p.body[1].id, 4);
}

void preorder(const Block& block, std::vector<const Statement*>& out) {
  for (const Statement& s : block) {
    out.push_back(&s);
    preorder(s.body, out);
    preorder(s.else_body, out);
  }
}

TEST(Ast, StatementSpansCoverTheirOwnTokens) {
  fuzz::ProgramFuzzer f(33);
  for (int i = 0; i < 300; ++i) {
    Program p = parse(f.program(60));
    const int n = number_nodes(p);
    const std::vector<Token> tokens = to_tokens(p);
    const std::vector<TokenSpan> spans = statement_spans(p);
    ASSERT_EQ(static_cast<int>(spans.size()), n);
    std::vector<const Statement*> nodes;
    preorder(p.body, nodes);
    for (int id = 0; id < n; ++id) {
      ASSERT_EQ(nodes[id]->id, id);
      std::vector<Token> alone{Token::kDef, Token::kRun, Token::kMainOpen};
      alone.insert(alone.end(), tokens.begin() + spans[id].begin, tokens.begin() + spans[id].end);
      alone.push_back(Token::kMainClose);
      const Program single = parse(alone);
      ASSERT_EQ(single.body.size(), 1u);
      EXPECT_EQ(single.body[0], *nodes[id]);
    }
  }
  const auto spans = statement_spans(parse("DEF run m( move IF c( not c( frontIsClear c) c) i( turnLeft i) m)"));
  EXPECT_EQ(spans, (std::vector<TokenSpan>{{3, 4}, {4, 14}, {12, 13}}));
}

}  // namespace
}  // namespace progsynth::dsl
