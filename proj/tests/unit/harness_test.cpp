// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <algorithm>

#include "progsynth/dsl/parser.hpp"
#include "progsynth/harness/experiments.hpp"
#include "progsynth/rng.hpp"
#include "progsynth/search/program_search.hpp"

namespace progsynth::harness {
namespace {

embedding::Params toy_params(uint64_t seed = 5) {
  Rng rng(seed);
  return embedding::Params::init({8, 16, 8, 8}, rng);
}

TEST(Corpus, BuiltinMatchesCheckedInFile) {
  const ReferenceCorpus disk = load_corpus(std::string(PROGSYNTH_DATA_DIR) + "/reference_programs.json");
  const ReferenceCorpus& built = builtin_corpus();
  EXPECT_EQ(disk.reconstruction, built.reconstruction);
  EXPECT_EQ(disk.tasks, built.tasks);
  EXPECT_EQ(built.target_names(),
            (std::vector<std::string>{"WHILE", "IFELSE+WHILE", "2IF+IFELSE", "WHILE+2IF+IFELSE"}));
  EXPECT_EQ(built.tasks.size(), 6u);
  EXPECT_THROW(built.target("nope"), CorpusError);
  EXPECT_EQ(built.task_program("maze"), built.task_program("Maze"));
}

TEST(Corpus, RejectsInvalidProgram) {
  nlohmann::json j = {{"reconstruction", {{"X", "DEF run m( move"}}}, {"tasks", nlohmann::json::object()}};
  EXPECT_THROW(parse_corpus(j), CorpusError);
}

TEST(Presets, MatchCheckedInPresetFile) {
  const SearchPresets& p = SearchPresets::builtin();
  const search::CemConfig w = p.cem(PresetDomain::kReconstruction, "WHILE");
  EXPECT_EQ(w.population, 32);
  EXPECT_DOUBLE_EQ(w.sigma, 0.25);
  EXPECT_DOUBLE_EQ(w.elite_fraction, 0.1);
  EXPECT_FALSE(w.exp_sigma_decay);
  EXPECT_EQ(w.init, search::InitDistribution::kNarrow);
  EXPECT_DOUBLE_EQ(w.max_reward, 1.1);
  const search::CemConfig maze = p.cem(PresetDomain::kTask, "maze");
  EXPECT_EQ(maze.population, 16);
  EXPECT_DOUBLE_EQ(maze.sigma, 0.1);
  EXPECT_EQ(maze.init, search::InitDistribution::kOnes);
  EXPECT_DOUBLE_EQ(maze.max_reward, 1.0);
  const search::CemConfig h = p.cem(PresetDomain::kTask, "Harvester");
  EXPECT_EQ(h.init, search::InitDistribution::kStandard);
  EXPECT_TRUE(h.exp_sigma_decay);
  const RandomPreset r = p.random("rand-64", PresetDomain::kTask, "FourCorner");
  EXPECT_EQ(r.samples, 64);
  EXPECT_DOUBLE_EQ(r.sigma, 0.25);
  EXPECT_EQ(p.random("rand-8", PresetDomain::kTask, "StairClimber").init, search::InitDistribution::kStandard);
  EXPECT_THROW(p.cem(PresetDomain::kReconstruction, "nope"), CorpusError);
  for (TaskKind k : kAllTasks) EXPECT_NO_THROW(p.cem(PresetDomain::kTask, std::string(task_name(k))));
}

TEST(ExperimentConfig, JsonRoundTripAndUnknownKeys) {
  ExperimentConfig c;
  c.targets = {"WHILE"};
  c.cem_overrides = {{"population", 16}};
  c.programs = {{"Maze", "DEF run m( move m)"}};
  c.fractions = {0.5};
  const ExperimentConfig back = nlohmann::json(c).get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
  EXPECT_THROW((nlohmann::json{{"sedds", 3}}.get<ExperimentConfig>()), ExperimentError);
  c.fractions = {1.5};
  EXPECT_NE(c.validate(), "");
}

TEST(ExperimentConfig, OverridesApplyOnTopOfPreset) {
  ExperimentConfig c;
  c.cem_overrides = {{"population", 16}, {"max_iters", 7}};
  const search::CemConfig cfg = resolve_cem(c, PresetDomain::kReconstruction, "WHILE");
  EXPECT_EQ(cfg.population, 16);
  EXPECT_EQ(cfg.max_iters, 7);
  EXPECT_DOUBLE_EQ(cfg.sigma, 0.25);
  c.cem_overrides = {{"populaton", 16}};
  EXPECT_THROW(resolve_cem(c, PresetDomain::kReconstruction, "WHILE"), ExperimentError);
}

TEST(ResultTable, SummaryIsRecomputableFromEntries) {
  ResultTable t;
  t.entries = {{"cem", "A", 0, 0, 1.0, 1.0, "", 0, false},
               {"cem", "A", 1, 1, 0.5, 0.5, "", 0, false},
               {"cem", "B", 0, 0, 0.2, 0.2, "", 0, false}};
  const auto s = t.summary();
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[0].mean, 0.75);
  EXPECT_DOUBLE_EQ(s[0].stddev, 0.25);
  EXPECT_EQ(s[0].n, 2);
  EXPECT_DOUBLE_EQ(s[1].stddev, 0.0);
  EXPECT_DOUBLE_EQ(t.average("cem"), (0.75 + 0.2) / 2);
  const ResultTable back = nlohmann::json(t).get<ResultTable>();
  EXPECT_EQ(back.entries_csv(), t.entries_csv());
  EXPECT_NE(t.summary_csv().find("cem,average,,0.475"), std::string::npos);
}

TEST(Solve, GroundTruthProgramsNeedNoSearch) {
  ExperimentConfig c;
  c.method = "ground-truth";
  c.targets = {"StairClimber", "Maze", "TopOff", "FourCorner", "CleanHouse", "Harvester"};
  c.seeds = 1;
  const ExperimentResult r = run_solve(nullptr, c);
  ASSERT_EQ(r.table.entries.size(), 6u);
  for (const ResultEntry& e : r.table.entries) {
    // The shipped Harvester program only clears 7 of 36 cells from the fixed start.
    EXPECT_DOUBLE_EQ(e.reward, e.target == "Harvester" ? 7.0 / 36.0 : 1.0) << e.target;
  }
  c.method = "cem";
  EXPECT_THROW(run_solve(nullptr, c), ExperimentError);
}

TEST(Solve, SearchReportsEvaluationReturnOfItsProgram) {
  const embedding::Params params = toy_params();
  ExperimentConfig c;
  c.targets = {"TopOff"};
  c.seeds = 2;
  c.cem_overrides = {{"max_iters", 3}, {"population", 8}};
  const ExperimentResult r = run_solve(&params, c);
  ASSERT_EQ(r.table.entries.size(), 2u);
  ASSERT_EQ(r.logs.size(), 2u);
  const auto eval = search::task_instances(default_spec(TaskKind::kTopOff), c.n_configs, derive_seed(c.seed, 0xe7a1));
  for (const ResultEntry& e : r.table.entries) {
    EXPECT_DOUBLE_EQ(e.reward, search::mean_return(dsl::parse(e.program), eval));
    EXPECT_LE(e.iterations, 3);
  }
}

TEST(Reconstruct, DeterministicAndIndependentOfWorkers) {
  const embedding::Params params = toy_params();
  ExperimentConfig c;
  c.targets = {"WHILE", "2IF+IFELSE"};
  c.seeds = 2;
  c.cem_overrides = {{"max_iters", 4}};
  c.workers = 1;
  const ExperimentResult a = run_reconstruct(params, c);
  c.workers = 3;
  const ExperimentResult b = run_reconstruct(params, c);
  EXPECT_EQ(a.table.entries_csv(), b.table.entries_csv());
  ASSERT_EQ(a.logs.size(), 4u);
  for (size_t i = 0; i < a.logs.size(); ++i) {
    EXPECT_EQ(a.logs[i].name, b.logs[i].name);
    EXPECT_EQ(search::trajectory_csv(a.logs[i].result), search::trajectory_csv(b.logs[i].result));
  }
  for (const ResultEntry& e : a.table.entries) {
    EXPECT_GE(e.reward, 0.1);
    EXPECT_LE(e.reward, 1.1);
  }
}

TEST(Reconstruct, PerfectSearchScoresMaximum) {
  const ReferenceCorpus& corpus = builtin_corpus();
  const auto states = search::reconstruction_states(0, 10);
  for (const auto& [name, text] : corpus.reconstruction) {
    const dsl::Program p = dsl::parse(text);
    EXPECT_DOUBLE_EQ(search::reconstruction_reward(p, states)(p), search::kReconstructionMax) << name;
  }
}

TEST(Reconstruct, RandomSearchMethodUsesPresetSampleCount) {
  const embedding::Params params = toy_params();
  ExperimentConfig c;
  c.targets = {"WHILE"};
  c.seeds = 1;
  c.method = "rand-8";
  const ExperimentResult r = run_reconstruct(params, c);
  ASSERT_EQ(r.logs.size(), 1u);
  EXPECT_EQ(r.logs[0].result.iterations, 1);
  c.method = "annealing";
  EXPECT_THROW(run_reconstruct(params, c), ExperimentError);
}

TEST(Generalize, GroundTruthTransfersToLargeGrids) {
  ExperimentConfig c;
  c.targets = {"StairClimber", "Maze"};
  const GeneralizeResult r = run_generalize(c);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const GeneralizeRow& row : r.rows) {
    EXPECT_DOUBLE_EQ(row.small_reward, 1.0) << row.task;
    EXPECT_DOUBLE_EQ(row.large_reward, 1.0) << row.task;
  }
}

TEST(Generalize, NoOpProgramScoresZeroOnBothSizes) {
  ExperimentConfig c;
  c.programs = {{"StairClimber", "DEF run m( turnLeft m)"}, {"Maze", "DEF run m( turnLeft m)"}};
  for (const GeneralizeRow& row : run_generalize(c).rows) {
    EXPECT_DOUBLE_EQ(row.small_reward, 0.0) << row.task;
    EXPECT_DOUBLE_EQ(row.large_reward, 0.0) << row.task;
  }
}

TEST(UnseenConfig, TopOffPoolEnumeratesEveryLayout) {
  const auto pool = config_pool(TaskKind::kTopOff, 0, 0);
  ASSERT_EQ(pool.size(), 512u);
  std::set<std::vector<Cell>> layouts;
  for (const TaskInstance& t : pool) {
    layouts.insert(t.target_cells);
    EXPECT_EQ(t.total_markers, t.initial.total_markers());
  }
  EXPECT_EQ(layouts.size(), 512u);
  EXPECT_EQ(pool[0b101].target_cells, (std::vector<Cell>{{10, 1}, {10, 3}}));
  const dsl::Program gt = dsl::parse(builtin_corpus().task_program("TopOff"));
  EXPECT_DOUBLE_EQ(search::mean_return(gt, pool), 1.0);
}

TEST(UnseenConfig, HarvesterPoolIsDistinctAndSeeded) {
  const auto a = config_pool(TaskKind::kHarvester, 200, 3);
  const auto b = config_pool(TaskKind::kHarvester, 200, 3);
  ASSERT_EQ(a.size(), 200u);
  std::set<std::string> layouts;
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].initial, b[i].initial);
    EXPECT_GT(a[i].total_markers, 0);
    layouts.insert(a[i].initial.render());
  }
  EXPECT_EQ(layouts.size(), 200u);
  EXPECT_EQ(harvester_config((uint64_t{1} << 36) - 1).initial, sample_task(TaskKind::kHarvester, 0).initial);
  EXPECT_THROW(config_pool(TaskKind::kMaze, 10, 0), ExperimentError);
}

TEST(UnseenConfig, SubsetsAreSeededAndSized) {
  EXPECT_EQ(config_subset(512, 0.25, 4), config_subset(512, 0.25, 4));
  EXPECT_NE(config_subset(512, 0.25, 4), config_subset(512, 0.25, 5));
  EXPECT_EQ(config_subset(512, 0.25, 4).size(), 128u);
  EXPECT_EQ(config_subset(512, 0.05, 4).size(), 26u);
  EXPECT_EQ(config_subset(512, 1.0, 9).size(), 512u);
  EXPECT_EQ(config_subset(10, 0.01, 9).size(), 1u);
  EXPECT_THROW(config_subset(10, 0.0, 0), ExperimentError);
  EXPECT_THROW(config_subset(10, 1.2, 0), ExperimentError);
}

TEST(UnseenConfig, ReportsAgainstFullPoolReference) {
  const embedding::Params params = toy_params();
  ExperimentConfig c;
  c.task = "TopOff";
  c.fractions = {0.25};
  c.seeds = 2;
  c.cem_overrides = {{"max_iters", 2}, {"population", 8}};
  const UnseenResult r = run_unseen_config(params, c);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(r.rows[0].fraction, 1.0);
  EXPECT_EQ(r.rows[0].train_configs, 512);
  EXPECT_EQ(r.rows[2].train_configs, 128);
  const auto pool = config_pool(TaskKind::kTopOff, 0, 0);
  for (const UnseenRow& row : r.rows) {
    EXPECT_DOUBLE_EQ(row.pool_reward, search::mean_return(dsl::parse(row.program), pool));
  }
  EXPECT_DOUBLE_EQ(r.rows[0].train_reward, r.rows[0].pool_reward);
  EXPECT_NE(r.summary_csv().find("TopOff,1,2,"), std::string::npos);
}

TEST(Interpolate, EndpointsSymmetryAndValidity) {
  const embedding::Params params = toy_params();
  const std::string a = "DEF run m( move m)";
  const std::string b = "DEF run m( WHILE c( frontIsClear c) w( move w) m)";
  const auto fwd = run_interpolate(params, a, b, 8);
  const auto rev = run_interpolate(params, b, a, 8);
  ASSERT_EQ(fwd.size(), 8u);
  EXPECT_DOUBLE_EQ(fwd.front().weight_b, 0.0);
  EXPECT_DOUBLE_EQ(fwd.back().weight_b, 1.0);
  for (size_t i = 0; i < fwd.size(); ++i) {
    EXPECT_EQ(fwd[i].program, rev[fwd.size() - 1 - i].program);
    EXPECT_NO_THROW(dsl::parse(fwd[i].program));
  }
  EXPECT_THROW(run_interpolate(params, a, b, 1), ExperimentError);
  EXPECT_THROW(run_interpolate(params, a, "DEF run", 3), dsl::ParseError);
}

TEST(ExportLatents, ShapeAndDeterminism) {
  const embedding::Params params = toy_params();
  datagen::GenConfig g;
  g.train_size = 10;
  g.val_size = 5;
  g.test_size = 30;
  g.workers = 1;
  const datagen::Dataset ds = datagen::build_dataset(g, 2);
  const std::string a = export_latents(params, ds.test);
  const std::string b = export_latents(params, ds.test);
  EXPECT_EQ(a, b);
  size_t rows = 0;
  size_t header_cols = 0;
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  header_cols = static_cast<size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  EXPECT_EQ(header_cols, 2u + 8u);
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, ds.test.records.size());
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](int i) { hits[static_cast<size_t>(i)] += 1; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 50);
  EXPECT_THROW(parallel_for(10, 3, [](int i) {
                 if (i == 7) throw std::runtime_error("x");
               }),
               std::runtime_error);
}

}  // namespace
}  // namespace progsynth::harness
