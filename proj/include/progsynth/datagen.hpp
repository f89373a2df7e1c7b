// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "progsynth/dsl/ast.hpp"
#include "progsynth/rng.hpp"
#include "progsynth/trace.hpp"

namespace progsynth::datagen {

/// Chance of each expansion of a statement slot.
struct SlotProbabilities {
  double loop_while = 0.15;
  double repeat = 0.03;
  double split = 0.5;  // the slot becomes two slots
  double action = 0.2;
  double when = 0.08;
  double when_else = 0.04;

  double sum() const { return loop_while + repeat + split + action + when + when_else; }
};

struct WorldSamplerConfig {
  int height = 8;
  int width = 8;
  double wall_density = 0.1;
  double marker_density = 0.2;
};

struct GenConfig {
  SlotProbabilities probs;
  int max_construct_depth = 4;
  int max_split_depth = 6;
  int max_program_tokens = 44;
  int max_sample_attempts = 1000;
  /// Chance that a sampled condition is wrapped in `not`.
  double negation_prob = 0.5;

  int rollouts_per_program = 10;
  int exec_cap = 100;
  int coverage_attempts = 50;
  WorldSamplerConfig world;

  int train_size = 5000;
  int val_size = 750;
  int test_size = 750;

  int workers = 0;  // 0 = hardware concurrency

  /// Empty when valid, otherwise a description of the first problem.
  std::string validate() const;
  int total() const { return train_size + val_size + test_size; }
};

void to_json(nlohmann::json& j, const GenConfig& cfg);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, GenConfig& cfg);

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Recursive slot sampler; resamples until the program fits. Throws
/// GenerationError after `max_sample_attempts` oversize draws.
dsl::Program sample_program(const GenConfig& cfg, Rng& rng);

/// Enclosed random world with a random agent pose.
GridState sample_world(const WorldSamplerConfig& cfg, Rng& rng);

/*!
 * \brief Rollouts whose union covers every branch outcome of `program`.
 *
 * Draws up to rollouts_per_program + coverage_attempts random worlds. Worlds
 * that add coverage are kept first; the remaining slots are filled with the
 * other draws in order. Returns nullopt when coverage cannot be completed.
 */
std::optional<std::vector<Rollout>> collect_rollouts(const dsl::Program& program, const GenConfig& cfg, Rng& rng);

struct DatasetRecord {
  std::string text;
  dsl::Program program;
  std::vector<Rollout> rollouts;
  uint64_t id = 0;  // fnv1a of the program text
};

struct Split {
  std::string name;
  std::vector<DatasetRecord> records;
};

struct Dataset {
  GenConfig cfg;
  uint64_t seed = 0;
  Split train{"train", {}};
  Split val{"val", {}};
  Split test{"test", {}};
  /// Candidate draws consumed, including duplicates and coverage rejects.
  int64_t candidates = 0;

  const Split& split(std::string_view name) const;
};

/// Unique programs with covering rollouts, split train/val/test. The result
/// depends only on (cfg, seed), not on the worker count.
Dataset build_dataset(const GenConfig& cfg, uint64_t seed);

/// One candidate of the build: the program and rollouts drawn for `index`, or nullopt.
std::optional<DatasetRecord> make_candidate(const GenConfig& cfg, uint64_t seed, int64_t index);

/*!
 * \brief Writes `<dir>/<split>.programs.txt`, `<dir>/<split>.rollouts.bin` and
 * `<dir>/manifest.json` (config, seed, counts and FNV-1a content hashes).
 */
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
/// Loads and verifies a saved dataset; rollouts are re-executed and checked against the stored actions.
Dataset load_dataset(const std::filesystem::path& dir);

/// Serialized rollout block for one split (exposed for tests).
std::string encode_rollouts(const std::vector<DatasetRecord>& records);
std::vector<std::vector<Rollout>> decode_rollouts(const std::string& bytes,
                                                  const std::vector<dsl::Program>& programs, int exec_cap);

}  // namespace progsynth::datagen
