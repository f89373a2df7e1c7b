// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"
#include "progsynth/harness/api.hpp"
#include "progsynth/harness/corpus.hpp"
#include "progsynth/rng.hpp"
#include "progsynth/search/program_search.hpp"

#include "httplib.h"

namespace progsynth::harness {
namespace {

using nlohmann::json;

// Reaches the far corner of the bottom row and marks it: one corner of four.
constexpr const char* kOneCorner = "DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnRight m)";
// Delete the first move, wrap the rest in a REPEAT, turn left instead of right.
constexpr const char* kRepaired =
    "DEF run m( REPEAT R=4 r( WHILE c( frontIsClear c) w( move w) putMarker turnLeft r) m)";

ApiResponse post(ApiService& api, const std::string& path, const json& body) {
  return api.handle("POST", path, body.dump());
}

TEST(Api, ParseReportsOkOrErrorIndex) {
  ApiService api;
  ApiResponse r = post(api, "/parse", {{"program", "DEF run m( move   turnLeft m)"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["ok"], true);
  EXPECT_EQ(r.body["program"], "DEF run m( move turnLeft m)");
  r = post(api, "/parse", {{"program", "DEF run m( move w) m)"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["ok"], false);
  EXPECT_EQ(r.body["index"], 4);
  r = post(api, "/parse", {{"program", "DEF run m( jump m)"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["index"], 3);
  EXPECT_EQ(post(api, "/parse", json::object()).status, 400);
  EXPECT_EQ(api.handle("POST", "/parse", "{not json").status, 400);
}

TEST(Api, ExecuteGroundTruthTopOff) {
  ApiService api;
  const std::string gt = builtin_corpus().task_program("TopOff");
  for (uint64_t seed : {0, 1, 2}) {
    const ApiResponse r = post(api, "/execute", {{"program", gt}, {"task", "TopOff"}, {"seed", seed}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body["reward"], 1.0);
    EXPECT_EQ(r.body["mean_reward"], 1.0);
    EXPECT_EQ(r.body["misplaced_marker"], false);
  }
}

TEST(Api, ExecuteTraceFramesAndNodeIds) {
  ApiService api;
  const std::string program = "DEF run m( REPEAT R=2 r( move r) IF c( frontIsClear c) i( turnLeft i) m)";
  const ApiResponse r = post(api, "/execute", {{"program", program}, {"task", "FourCorner"}, {"seed", 3}});
  ASSERT_EQ(r.status, 200);
  const json& b = r.body;
  ASSERT_EQ(b["actions"].size(), 3u);
  EXPECT_EQ(b["frames"].size(), b["actions"].size() + 1);
  EXPECT_EQ(b["action_nodes"], json({1, 1, 3}));
  EXPECT_EQ(b["frames"][0]["action"], nullptr);
  EXPECT_EQ(b["frames"][1]["action"], "move");
  EXPECT_EQ(b["frames"][3]["node"], 3);
  EXPECT_EQ(b["frames"][0]["agent"]["row"], 10);
  EXPECT_EQ(b["frames"][2]["agent"]["col"], 3);
  EXPECT_EQ(b["frames"][3]["agent"]["dir"], "north");
  EXPECT_EQ(b["grid"]["walls"].size(), 12u);
  EXPECT_EQ(b["terminated"], "program_end");
  // Node 1 is the `move` inside the REPEAT; its span covers that single token.
  const std::vector<std::string> words = {"DEF", "run", "m(", "REPEAT", "R=2", "r(", "move"};
  EXPECT_EQ(b["statements"][1]["begin"], 6);
  EXPECT_EQ(b["statements"][1]["end"], 7);
  EXPECT_EQ(words[b["statements"][1]["begin"].get<size_t>()], "move");
}

TEST(Api, ExecuteMatchesInterpreterAndIsPure) {
  ApiService api;
  const std::string program = builtin_corpus().task_program("Maze");
  const json req = {{"program", program}, {"task", "Maze"}, {"seed", 11}};
  const ApiResponse a = post(api, "/execute", req);
  const ApiResponse b = post(api, "/execute", req);
  EXPECT_EQ(a.body, b.body);
  const TaskInstance inst = search::task_instances(default_spec(TaskKind::kMaze), 10, 11).front();
  const Rollout roll = dsl::execute(dsl::parse(program), inst.initial, inst.spec.horizon);
  EXPECT_EQ(a.body["action_nodes"], json(roll.action_nodes));
  EXPECT_EQ(a.body["reward"], task_reward(inst, roll));
}

TEST(Api, ExecuteRejectsBadInput) {
  ApiService api;
  EXPECT_EQ(post(api, "/execute", {{"program", "DEF run m( m)"}, {"task", "Maze"}}).status, 400);
  EXPECT_EQ(post(api, "/execute", {{"program", "DEF run m( move m)"}, {"task", "Sokoban"}}).status, 400);
  EXPECT_EQ(post(api, "/execute", {{"program", "DEF run m( move m)"}, {"task", "Maze"}, {"seed", -1}}).status, 400);
  EXPECT_EQ(
      post(api, "/execute", {{"program", "DEF run m( move m)"}, {"task", "Maze"}, {"height", 1000}}).status, 400);
  const ApiResponse big =
      post(api, "/execute",
           {{"program", builtin_corpus().task_program("StairClimber")}, {"task", "StairClimber"}, {"height", 100},
            {"width", 100}});
  ASSERT_EQ(big.status, 200);
  EXPECT_EQ(big.body["grid"]["height"], 100);
  EXPECT_EQ(big.body["mean_reward"], 1.0);
}

TEST(Api, EditDistance) {
  ApiService api;
  EXPECT_EQ(post(api, "/edit-distance", {{"original", kOneCorner}, {"edited", kOneCorner}}).body["distance"], 0);
  EXPECT_EQ(post(api, "/edit-distance", {{"original", kOneCorner}, {"edited", kRepaired}}).body["distance"], 3);
  const ApiResponse bad = post(api, "/edit-distance", {{"original", kOneCorner}, {"edited", "DEF"}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["field"], "edited");
}

TEST(Api, SessionRepairWithinBudget) {
  ApiService api;
  const ApiResponse start = post(api, "/session/start", {{"task", "FourCorner"}, {"program", kOneCorner}, {"budget", 3}});
  ASSERT_EQ(start.status, 200);
  EXPECT_EQ(start.body["orig_reward"], 0.25);
  EXPECT_EQ(start.body["best_so_far"], nullptr);
  const std::string id = start.body["session"];

  ApiResponse r = post(api, "/session/submit", {{"session", id}, {"edited", kOneCorner}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["distance"], 0);
  EXPECT_EQ(r.body["best_so_far"], 0.25);

  r = post(api, "/session/submit", {{"session", id}, {"edited", kRepaired}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["reward"], 1.0);
  EXPECT_EQ(r.body["distance"], 3);
  EXPECT_EQ(r.body["within_budget"], true);
  EXPECT_EQ(r.body["best_so_far"], 1.0);
  EXPECT_EQ(r.body["rollout"]["frames"].size(), r.body["rollout"]["actions"].size() + 1);

  // A worse valid program leaves the best unchanged.
  r = post(api, "/session/submit", {{"session", id}, {"edited", "DEF run m( move WHILE c( frontIsClear c) w( move w) m)"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["reward"], 0.0);
  EXPECT_EQ(r.body["best_so_far"], 1.0);
}

TEST(Api, SessionBudgetViolationIs422) {
  ApiService api;
  const std::string id =
      post(api, "/session/start", {{"task", "FourCorner"}, {"program", kOneCorner}, {"budget", 3}}).body["session"];
  // Four inserted actions.
  const std::string four =
      "DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnRight turnLeft turnLeft turnLeft turnLeft m)";
  ApiResponse r = post(api, "/session/submit", {{"session", id}, {"edited", four}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["distance"], 4);
  EXPECT_EQ(r.body["within_budget"], false);
  EXPECT_NE(r.body["error"].get<std::string>().find("Issue with Code?"), std::string::npos);
  EXPECT_EQ(r.body["best_so_far"], nullptr);

  const std::string id5 =
      post(api, "/session/start", {{"task", "FourCorner"}, {"program", kOneCorner}, {"budget", 5}}).body["session"];
  EXPECT_EQ(post(api, "/session/submit", {{"session", id5}, {"edited", four}}).status, 200);
  const std::string six =
      "DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnRight turnLeft turnLeft turnLeft turnLeft "
      "turnLeft turnLeft m)";
  r = post(api, "/session/submit", {{"session", id5}, {"edited", six}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["distance"], 6);

  r = post(api, "/session/submit", {{"session", id5}, {"edited", "DEF run m( move"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(post(api, "/session/submit", {{"session", "feedbeef"}, {"edited", kOneCorner}}).status, 404);
  EXPECT_EQ(post(api, "/session/start", {{"task", "FourCorner"}, {"program", kOneCorner}, {"budget", 4}}).status, 400);
}

TEST(Api, TasksAndRouting) {
  ApiService api;
  const ApiResponse r = api.handle("GET", "/tasks", "");
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body["tasks"].size(), 6u);
  EXPECT_EQ(r.body["tasks"][0]["name"], "StairClimber");
  EXPECT_EQ(r.body["tasks"][5]["height"], 8);
  EXPECT_EQ(api.handle("GET", "/nope", "").status, 404);
  EXPECT_EQ(api.handle("GET", "/parse", "").status, 405);
  EXPECT_EQ(api.handle("POST", "/tasks", "").status, 405);
}

TEST(Api, DecodeNeedsCheckpoint) {
  ApiService none;
  EXPECT_EQ(post(none, "/decode", {{"program", kOneCorner}}).status, 503);
  Rng rng(1);
  ApiService api(embedding::Params::init({8, 16, 8, 8}, rng));
  const ApiResponse r = post(api, "/decode", {{"program", kOneCorner}});
  ASSERT_EQ(r.status, 200);
  EXPECT_NO_THROW(dsl::parse(r.body["program"].get<std::string>()));
  EXPECT_EQ(r.body["latent"].size(), 8u);
  const ApiResponse again = post(api, "/decode", {{"latent", r.body["latent"]}});
  EXPECT_EQ(again.body["program"], r.body["program"]);
  EXPECT_EQ(post(api, "/decode", {{"latent", {1.0, 2.0}}}).status, 400);
}

TEST(ApiServer, ServesOverHttp) {
  ApiService api;
  ApiServer server(api);
  const int port = server.bind("127.0.0.1", 0);
  server.start();
  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/tasks");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["tasks"].size(), 6u);
  res = cli.Post("/parse", json({{"program", "DEF run m( move"}}).dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = cli.Post("/session/start", json({{"task", "FourCorner"}, {"program", kOneCorner}}).dump(), "application/json");
  ASSERT_TRUE(res);
  const std::string id = json::parse(res->body)["session"];
  const std::string six =
      "DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnRight turnLeft turnLeft turnLeft turnLeft "
      "turnLeft turnLeft m)";
  res = cli.Post("/session/submit", json({{"session", id}, {"edited", six}}).dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  server.stop();
}

}  // namespace
}  // namespace progsynth::harness
