// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "progsynth/datagen.hpp"
#include "progsynth/embedding/model.hpp"
#include "progsynth/harness/corpus.hpp"
#include "progsynth/search/cem.hpp"

namespace progsynth::harness {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*!
 * \brief Settings shared by every experiment kind. Fields irrelevant to a
 * kind are ignored. Serialized as flat JSON; missing keys keep defaults.
 */
struct ExperimentConfig {
  std::filesystem::path checkpoint;
  /// Reconstruction target names or task names; empty selects all.
  std::vector<std::string> targets;
  /// "cem", "rand-8", "rand-64" or, for task experiments, "ground-truth".
  std::string method = "cem";
  /// Applied on top of the preset of each target.
  nlohmann::json cem_overrides = nlohmann::json::object();
  int seeds = 5;
  uint64_t seed = 0;
  /// Reconstruction states or task configurations scored per candidate.
  int n_configs = 10;
  /// Parallel (target, seed) jobs; 0 uses every hardware thread.
  int workers = 1;

  // generalize
  int large_grid = 100;
  /// Task name to program text; empty uses the reference solutions.
  std::map<std::string, std::string> programs;
  /// A results.json from a solve run whose programs are re-evaluated.
  std::filesystem::path results;

  // unseen-config
  std::string task = "TopOff";
  std::vector<double> fractions = {0.75, 0.5, 0.25, 0.1, 0.05};
  int pool_size = 10000;

  // interpolate
  std::string program_a;
  std::string program_b;
  int steps = 8;

  // export-latents
  std::filesystem::path dataset;
  std::string split = "test";

  std::string validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// One search (or direct evaluation) outcome.
struct ResultEntry {
  std::string method;
  std::string target;
  int seed_index = 0;
  uint64_t seed = 0;
  /// Reported return: reconstruction reward, or task return on the evaluation configurations.
  double reward = 0.0;
  /// Reward the search itself optimized.
  double search_reward = 0.0;
  std::string program;
  int iterations = 0;
  bool converged = false;
};

void to_json(nlohmann::json& j, const ResultEntry& e);
void from_json(const nlohmann::json& j, ResultEntry& e);

struct ResultSummary {
  std::string method;
  std::string target;
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct ResultTable {
  std::vector<ResultEntry> entries;

  /// Per (method, target) in first-appearance order.
  std::vector<ResultSummary> summary() const;
  /// Mean over targets of the per-target means of `method`.
  double average(const std::string& method) const;
  std::string entries_csv() const;
  std::string summary_csv() const;
};

void to_json(nlohmann::json& j, const ResultTable& t);
void from_json(const nlohmann::json& j, ResultTable& t);

struct NamedLog {
  std::string name;  // e.g. "WHILE_seed0"
  search::SearchResult result;
};

struct ExperimentResult {
  ResultTable table;
  std::vector<NamedLog> logs;
};

/// Search hyperparameters for `target`: preset, then overrides.
search::CemConfig resolve_cem(const ExperimentConfig& cfg, PresetDomain domain, const std::string& target,
                              const SearchPresets& presets = SearchPresets::builtin());

/// Seed of the `index`-th repetition.
uint64_t run_seed(const ExperimentConfig& cfg, int index);

/// Searches every reconstruction target with the behavior-matching reward.
ExperimentResult run_reconstruct(const embedding::Params& params, const ExperimentConfig& cfg,
                                 const ReferenceCorpus& corpus = builtin_corpus());

/*!
 * \brief Per-task search maximizing mean return. Each search scores
 * candidates on its own fixed configurations; the reported return is
 * measured on evaluation configurations shared by all runs. Method
 * "ground-truth" scores the reference solution directly and needs no
 * parameters.
 */
ExperimentResult run_solve(const embedding::Params* params, const ExperimentConfig& cfg,
                           const ReferenceCorpus& corpus = builtin_corpus());

struct GeneralizeRow {
  std::string method;
  std::string task;
  int seed_index = 0;
  std::string program;
  double small_reward = 0.0;
  double large_reward = 0.0;
};

struct GeneralizeResult {
  std::vector<GeneralizeRow> rows;
  std::string csv() const;
};

/// Re-scores programs on the standard grid and on large_grid x large_grid instances.
GeneralizeResult run_generalize(const ExperimentConfig& cfg, const ReferenceCorpus& corpus = builtin_corpus());

/// TopOff: all 2^9 bottom-row layouts, pool index = bit mask.
TaskInstance top_off_config(uint32_t mask);
/// Harvester: marker on interior cell i (row-major) when bit i of `mask` is set.
TaskInstance harvester_config(uint64_t mask);
/// Every TopOff layout, or `pool_size` distinct non-empty Harvester layouts drawn from `seed`.
std::vector<TaskInstance> config_pool(TaskKind task, int pool_size, uint64_t seed);
/// Seeded subset of round(fraction * n) pool indices (at least 1), sorted.
std::vector<int> config_subset(int n, double fraction, uint64_t seed);

struct UnseenRow {
  double fraction = 1.0;
  int seed_index = 0;
  int train_configs = 0;
  double train_reward = 0.0;  // mean over the training subset
  double pool_reward = 0.0;   // mean over the full pool
  std::string program;
};

struct UnseenResult {
  std::string task;
  std::vector<UnseenRow> rows;
  std::string csv() const;
  /// fraction, mean, stddev, percent change of the mean against fraction 1.0.
  std::string summary_csv() const;
};

/// Search on a fraction of the configuration pool, evaluate on the full pool.
/// Fraction 1.0 is always run and serves as the reference.
UnseenResult run_unseen_config(const embedding::Params& params, const ExperimentConfig& cfg);

struct InterpolationRow {
  int index = 0;
  double weight_b = 0.0;
  std::string program;
};

/// Decodes `steps` evenly spaced points between the encodings of a and b, endpoints included.
std::vector<InterpolationRow> run_interpolate(const embedding::Params& params, const std::string& program_a,
                                              const std::string& program_b, int steps = 8);
std::string interpolation_csv(const std::vector<InterpolationRow>& rows);

/// One row per program: id, text and the posterior mean coordinates.
std::string export_latents(const embedding::Params& params, const datagen::Split& split);

/// Runs fn(0..n-1) on up to `workers` threads; exceptions are rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace progsynth::harness
