// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "progsynth/datagen.hpp"
#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"

namespace progsynth::datagen {
namespace {

GenConfig small_config(int n = 60) {
  GenConfig cfg;
  cfg.train_size = n;
  cfg.val_size = n / 6;
  cfg.test_size = n / 6;
  cfg.workers = 1;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("progsynth_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(GenConfig, DefaultsAreValid) {
  GenConfig cfg;
  EXPECT_EQ(cfg.validate(), "");
  EXPECT_DOUBLE_EQ(cfg.probs.sum(), 1.0);
  cfg.probs.split = 0.6;
  EXPECT_NE(cfg.validate(), "");
}

TEST(GenConfig, JsonRoundTrip) {
  GenConfig cfg;
  cfg.probs.loop_while = 0.1;
  cfg.probs.action = 0.25;
  cfg.train_size = 17;
  cfg.world.wall_density = 0.3;
  const nlohmann::json j = cfg;
  const GenConfig back = j.get<GenConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
}

TEST(SampleProgram, ActionOnlyDistribution) {
  GenConfig cfg;
  cfg.probs = {0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const dsl::Program p = sample_program(cfg, rng);
    ASSERT_EQ(p.body.size(), 1u);
    EXPECT_EQ(p.body[0].kind, dsl::Statement::Kind::kAction);
  }
}

TEST(SampleProgram, DeterministicUnderSeed) {
  const GenConfig cfg;
  for (uint64_t s = 0; s < 20; ++s) {
    Rng a(s);
    Rng b(s);
    EXPECT_EQ(dsl::to_text(sample_program(cfg, a)), dsl::to_text(sample_program(cfg, b)));
  }
}

TEST(SampleProgram, RespectsLimits) {
  const GenConfig cfg;
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const dsl::Program p = sample_program(cfg, rng);
    EXPECT_LE(dsl::to_tokens(p).size(), 44u);
    EXPECT_LE(dsl::construct_depth(p), 4);
  }
}

TEST(SampleProgram, GivesUpWhenNothingFits) {
  GenConfig cfg;
  cfg.max_program_tokens = 5;
  cfg.probs = {0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
  cfg.probs.action = 1e-9;
  cfg.probs.split = 1.0 - 1e-9;
  Rng rng(0);
  EXPECT_THROW(sample_program(cfg, rng), GenerationError);
}

TEST(SampleWorld, EnclosedAndValid) {
  const WorldSamplerConfig cfg;
  Rng rng(4);
  int walls = 0;
  int markers = 0;
  for (int i = 0; i < 200; ++i) {
    const GridState g = sample_world(cfg, rng);
    ASSERT_TRUE(g.valid()) << g.validate();
    for (int r = 1; r < 7; ++r) {
      for (int c = 1; c < 7; ++c) {
        walls += g.is_wall(r, c) ? 1 : 0;
        markers += g.markers(r, c) > 0 ? 1 : 0;
      }
    }
  }
  EXPECT_NEAR(walls / (200.0 * 36), 0.1, 0.02);
  EXPECT_NEAR(markers / (200.0 * 36), 0.2 * 0.9, 0.03);
}

TEST(CollectRollouts, StraightLineAcceptedImmediately) {
  const GenConfig cfg;
  Rng rng(2);
  const auto r = collect_rollouts(dsl::parse("DEF run m( move turnLeft m)"), cfg, rng);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->size(), 10u);
}

TEST(CollectRollouts, ConditionalSeesBothOutcomes) {
  const GenConfig cfg;
  Rng rng(3);
  const dsl::Program p = dsl::parse("DEF run m( IF c( frontIsClear c) i( move i) m)");
  const auto r = collect_rollouts(p, cfg, rng);
  ASSERT_TRUE(r.has_value());
  bool fired = false;
  bool skipped = false;
  for (const Rollout& x : *r) {
    fired = fired || x.perceptions.size() == 1;
    skipped = skipped || x.actions.empty();
  }
  EXPECT_TRUE(fired);
  EXPECT_TRUE(skipped);
}

TEST(CollectRollouts, UnsatisfiableConditionRejected) {
  GenConfig cfg;
  cfg.world.marker_density = 0.0;
  Rng rng(5);
  EXPECT_FALSE(collect_rollouts(dsl::parse("DEF run m( IF c( markersPresent c) i( move i) m)"), cfg, rng));
}

TEST(BuildDataset, UniqueCoveredAndSized) {
  const GenConfig cfg = small_config();
  const Dataset ds = build_dataset(cfg, 11);
  EXPECT_EQ(ds.train.records.size(), 60u);
  EXPECT_EQ(ds.val.records.size(), 10u);
  EXPECT_EQ(ds.test.records.size(), 10u);
  std::set<std::string> texts;
  for (const Split* s : {&ds.train, &ds.val, &ds.test}) {
    for (const DatasetRecord& r : s->records) {
      EXPECT_TRUE(texts.insert(r.text).second) << r.text;
      EXPECT_EQ(dsl::to_text(r.program), r.text);
      ASSERT_EQ(r.rollouts.size(), 10u);
      std::vector<BranchEvent> seen;
      for (const Rollout& x : r.rollouts) {
        EXPECT_LE(x.size(), 100u);
        seen.insert(seen.end(), x.branch_events.begin(), x.branch_events.end());
      }
      std::sort(seen.begin(), seen.end());
      for (const BranchEvent& e : dsl::required_branches(r.program)) {
        EXPECT_TRUE(std::binary_search(seen.begin(), seen.end(), e)) << r.text;
      }
    }
  }
}

TEST(BuildDataset, IndependentOfWorkerCount) {
  GenConfig one = small_config(30);
  GenConfig three = one;
  three.workers = 3;
  const Dataset a = build_dataset(one, 5);
  const Dataset b = build_dataset(three, 5);
  ASSERT_EQ(a.train.records.size(), b.train.records.size());
  for (size_t i = 0; i < a.train.records.size(); ++i) EXPECT_EQ(a.train.records[i].text, b.train.records[i].text);
  EXPECT_EQ(encode_rollouts(a.test.records), encode_rollouts(b.test.records));
}

TEST(BuildDataset, SaveLoadAndRebuildAreIdentical) {
  const GenConfig cfg = small_config(30);
  const auto dir1 = scratch_dir("ds1");
  const auto dir2 = scratch_dir("ds2");
  save_dataset(build_dataset(cfg, 8), dir1);
  save_dataset(build_dataset(cfg, 8), dir2);
  EXPECT_EQ(slurp(dir1 / "manifest.json"), slurp(dir2 / "manifest.json"));
  EXPECT_EQ(slurp(dir1 / "train.rollouts.bin"), slurp(dir2 / "train.rollouts.bin"));

  const Dataset loaded = load_dataset(dir1);
  const Dataset fresh = build_dataset(cfg, 8);
  ASSERT_EQ(loaded.train.records.size(), fresh.train.records.size());
  for (size_t i = 0; i < fresh.train.records.size(); ++i) {
    EXPECT_EQ(loaded.train.records[i].text, fresh.train.records[i].text);
    ASSERT_EQ(loaded.train.records[i].rollouts.size(), fresh.train.records[i].rollouts.size());
    EXPECT_EQ(loaded.train.records[i].rollouts[3].actions, fresh.train.records[i].rollouts[3].actions);
  }

  // Corrupting a content file trips the hash check.
  {
    std::ofstream out(dir1 / "val.programs.txt", std::ios::app);
    out << "DEF run m( move m)\n";
  }
  EXPECT_THROW(load_dataset(dir1), std::runtime_error);
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST(DecodeRollouts, RejectsForeignData) {
  EXPECT_THROW(decode_rollouts("nope", {}, 100), std::runtime_error);
}

}  // namespace
}  // namespace progsynth::datagen
