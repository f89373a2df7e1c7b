// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "progsynth/search/cem.hpp"
#include "progsynth/tasks.hpp"

namespace progsynth::harness {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hand-written reference programs: reconstruction targets and per-task solutions.
struct ReferenceCorpus {
  std::vector<std::pair<std::string, std::string>> reconstruction;  // (name, program text), file order
  std::vector<std::pair<std::string, std::string>> tasks;           // (task name, program text)

  const std::string& target(const std::string& name) const;
  const std::string& task_program(const std::string& task) const;
  std::vector<std::string> target_names() const;
};

/// Parses and validates the corpus; every program must parse.
ReferenceCorpus parse_corpus(const nlohmann::json& j);
ReferenceCorpus load_corpus(const std::filesystem::path& path);
/// The copy compiled into the library.
const ReferenceCorpus& builtin_corpus();

enum class PresetDomain { kReconstruction, kTask };

struct RandomPreset {
  int samples = 8;
  double sigma = 0.5;
  search::InitDistribution init = search::InitDistribution::kNarrow;
};

/// Best-known search hyperparameters per reconstruction target and per task.
class SearchPresets {
 public:
  static SearchPresets parse(const nlohmann::json& j);
  static SearchPresets load(const std::filesystem::path& path);
  static const SearchPresets& builtin();

  /// Throws CorpusError for an unknown name.
  search::CemConfig cem(PresetDomain domain, const std::string& name) const;
  /// `method` is "rand-8" or "rand-64".
  RandomPreset random(const std::string& method, PresetDomain domain, const std::string& name) const;
  const nlohmann::json& raw() const { return raw_; }

 private:
  nlohmann::json raw_;
};

}  // namespace progsynth::harness
