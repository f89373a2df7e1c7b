// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <signal.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "json.hpp"

#include "httplib.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kWork = fs::path(PROGSYNTH_CLI_WORKDIR);

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

/// Runs the CLI and returns its exit status.
int cli(const std::string& args) {
  const std::string cmd = std::string(PROGSYNTH_CLI) + " " + args + " >>" + (kWork / "cli.log").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string q(const std::string& s) { return "'" + s + "'"; }

/// Tiny dataset and checkpoint shared by the tests below.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    ASSERT_EQ(cli("gen-data --train-size 24 --val-size 6 --test-size 8 --workers 1 --seed 5 --out " +
                  (kWork / "data").string()),
              0);
    std::ofstream(kWork / "train.json") << R"({"preset": "desk", "rounds": 1, "batch_size": 8,
        "dims": {"embed": 8, "hidden": 16, "latent": 8, "policy_hidden": 8}, "eval_programs": 6})";
    ASSERT_EQ(cli("train --config " + (kWork / "train.json").string() + " --dataset " +
                  (kWork / "data/dataset").string() + " --seed 1 --out " + (kWork / "train").string()),
              0);
  }

  static std::string ckpt() { return (kWork / "train/best.ckpt").string(); }
  static json manifest(const std::string& dir) { return json::parse(slurp(kWork / dir / "manifest.json")); }
};

TEST_F(CliTest, GenDataWritesDatasetAndManifest) {
  const json m = manifest("data");
  EXPECT_EQ(m["command"], "gen-data");
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["config"]["train_size"], 24);
  EXPECT_TRUE(m["outputs"].contains("splits.csv"));
  EXPECT_TRUE(m["outputs"].contains("dataset/train.programs.txt"));
  EXPECT_EQ(count_lines(slurp(kWork / "data/dataset/train.programs.txt")), 24);
  EXPECT_EQ(count_lines(slurp(kWork / "data/splits.csv")), 4);

  ASSERT_EQ(cli("gen-data --train-size 24 --val-size 6 --test-size 8 --workers 1 --seed 5 --out " +
                (kWork / "data2").string()),
            0);
  EXPECT_EQ(manifest("data2")["outputs"], m["outputs"]);
}

TEST_F(CliTest, TrainRecordsCheckpointHash) {
  const json m = manifest("train");
  EXPECT_EQ(m["command"], "train");
  EXPECT_EQ(m["config"]["rounds"], 1);
  EXPECT_EQ(m["config"]["dims"]["latent"], 8);
  EXPECT_EQ(m["checkpoint"]["params_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(fs::exists(kWork / "train/metrics.csv"));
  EXPECT_TRUE(fs::exists(kWork / "train/last.ckpt"));
}

TEST_F(CliTest, ReconstructIsReproducible) {
  const std::string args = "reconstruct --checkpoint " + ckpt() +
                           " --targets WHILE --seeds 2 --set cem_overrides.max_iters=3 --seed 9 --out ";
  ASSERT_EQ(cli(args + (kWork / "rec1").string()), 0);
  ASSERT_EQ(cli(args + (kWork / "rec2").string()), 0);
  const std::string csv = slurp(kWork / "rec1/results.csv");
  EXPECT_EQ(count_lines(csv), 3);
  EXPECT_EQ(csv, slurp(kWork / "rec2/results.csv"));
  EXPECT_EQ(count_lines(slurp(kWork / "rec1/logs/WHILE_seed0.csv")), 4);
  EXPECT_TRUE(fs::exists(kWork / "rec1/trajectories/WHILE_seed1.csv"));
  const json m = manifest("rec1");
  EXPECT_EQ(m["outputs"], manifest("rec2")["outputs"]);
  EXPECT_EQ(m["checkpoint"]["params_hash"], manifest("train")["checkpoint"]["params_hash"]);
  EXPECT_EQ(m["config"]["cem_overrides"]["max_iters"], 3);
}

TEST_F(CliTest, SolveGroundTruthThenGeneralize) {
  ASSERT_EQ(cli("solve --method ground-truth --targets StairClimber,Maze --seeds 1 --out " +
                (kWork / "solve").string()),
            0);
  const std::string summary = slurp(kWork / "solve/summary.csv");
  EXPECT_NE(summary.find("ground-truth,StairClimber,1,1,0"), std::string::npos);
  EXPECT_NE(summary.find("ground-truth,Maze,1,1,0"), std::string::npos);
  ASSERT_EQ(cli("generalize --results " + (kWork / "solve/results.json").string() + " --large-grid 40 --out " +
                (kWork / "gen").string()),
            0);
  const std::string gen = slurp(kWork / "gen/generalize.csv");
  EXPECT_EQ(count_lines(gen), 3);
  EXPECT_NE(gen.find("ground-truth,Maze,0,1,1,"), std::string::npos);
}

TEST_F(CliTest, SolveWithSearch) {
  ASSERT_EQ(cli("solve --checkpoint " + ckpt() +
                " --targets TopOff --seeds 1 --n-configs 2 --set cem_overrides.max_iters=2 --out " +
                (kWork / "solve_cem").string()),
            0);
  EXPECT_EQ(count_lines(slurp(kWork / "solve_cem/results.csv")), 2);
}

TEST_F(CliTest, UnseenConfig) {
  ASSERT_EQ(cli("unseen-config --checkpoint " + ckpt() +
                " --task TopOff --fractions 0.5 --seeds 1 --n-configs 2 --set cem_overrides.max_iters=2 --out " +
                (kWork / "unseen").string()),
            0);
  EXPECT_EQ(count_lines(slurp(kWork / "unseen/unseen.csv")), 3);
  EXPECT_EQ(count_lines(slurp(kWork / "unseen/summary.csv")), 3);
}

TEST_F(CliTest, InterpolateAndExport) {
  ASSERT_EQ(cli("interpolate --checkpoint " + ckpt() + " --a " + q("DEF run m( move m)") + " --b " +
                q("DEF run m( turnLeft turnLeft m)") + " --steps 5 --out " + (kWork / "interp").string()),
            0);
  EXPECT_EQ(count_lines(slurp(kWork / "interp/interpolation.csv")), 6);
  ASSERT_EQ(cli("export-latents --checkpoint " + ckpt() + " --dataset " + (kWork / "data/dataset").string() +
                " --split test --out " + (kWork / "lat").string()),
            0);
  const std::string csv = slurp(kWork / "lat/latents.csv");
  EXPECT_EQ(count_lines(csv), 9);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "id,program,z0,z1,z2,z3,z4,z5,z6,z7");
}

TEST_F(CliTest, ConfigFileWithOverrides) {
  std::ofstream(kWork / "solve.json") << R"({"method": "ground-truth", "targets": ["Maze"], "seeds": 3})";
  ASSERT_EQ(cli("solve --config " + (kWork / "solve.json").string() + " --seeds 2 --seed 4 --out " +
                (kWork / "solve_cfg").string()),
            0);
  const json m = manifest("solve_cfg");
  EXPECT_EQ(m["config"]["seeds"], 2);
  EXPECT_EQ(m["config"]["targets"], json({"Maze"}));
  EXPECT_EQ(m["seed"], 4);
}

TEST_F(CliTest, RejectsBadInputWithoutWriting) {
  EXPECT_EQ(cli("solve --set nonsense=1 --out " + (kWork / "bad1").string()), 2);
  EXPECT_EQ(cli("reconstruct --out " + (kWork / "bad2").string()), 2);
  EXPECT_EQ(cli("gen-data --train-size -3 --out " + (kWork / "bad3").string()), 2);
  EXPECT_FALSE(fs::exists(kWork / "bad1"));
  EXPECT_FALSE(fs::exists(kWork / "bad3"));
  EXPECT_NE(cli("no-such-command"), 0);
}

TEST_F(CliTest, ServeAnswersRequests) {
  const fs::path log = kWork / "serve.log";
  const std::string cmd = std::string(PROGSYNTH_CLI) + " serve --port 0 --checkpoint " + ckpt() + " >" +
                          log.string() + " 2>&1 & echo $! >" + (kWork / "serve.pid").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  int port = 0;
  for (int i = 0; i < 100 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    const std::string out = slurp(log);
    const size_t colon = out.rfind(':');
    if (out.find("listening on") != std::string::npos && colon != std::string::npos)
      port = std::atoi(out.c_str() + colon + 1);
  }
  struct Reaper {
    pid_t pid;
    ~Reaper() { kill(pid, SIGTERM); }
  } reaper{std::stoi(slurp(kWork / "serve.pid"))};
  ASSERT_GT(port, 0) << slurp(log);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/execute", json({{"program", "DEF run m( move m)"}, {"task", "Maze"}, {"seed", 1}}).dump(),
                         "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["frames"].size(), 2u);
  res = client.Post("/decode", json({{"program", "DEF run m( move m)"}}).dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
}

}  // namespace
