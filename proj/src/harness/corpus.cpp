// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/harness/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "builtin_data.inc"
#include "progsynth/dsl/parser.hpp"

namespace progsynth::harness {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> program_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_object()) throw CorpusError(std::string("corpus lacks '") + key + "'");
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, text] : j.at(key).items()) {
    try {
      dsl::parse(text.get<std::string>());
    } catch (const std::exception& e) {
      throw CorpusError("corpus program '" + name + "' is invalid: " + e.what());
    }
    out.emplace_back(name, text.get<std::string>());
  }
  return out;
}

const std::string& lookup(const std::vector<std::pair<std::string, std::string>>& list, const std::string& name,
                          const char* what) {
  for (const auto& [k, v] : list) {
    if (k == name) return v;
  }
  throw CorpusError(std::string("no ") + what + " named '" + name + "'");
}

}  // namespace

const std::string& ReferenceCorpus::target(const std::string& name) const {
  return lookup(reconstruction, name, "reconstruction target");
}

const std::string& ReferenceCorpus::task_program(const std::string& task) const {
  return lookup(tasks, std::string(task_name(task_from_name(task))), "task program");
}

std::vector<std::string> ReferenceCorpus::target_names() const {
  std::vector<std::string> out;
  for (const auto& entry : reconstruction) out.push_back(entry.first);
  return out;
}

ReferenceCorpus parse_corpus(const nlohmann::json& j) {
  // nlohmann::json sorts object keys; the on-disk order is restored below.
  ReferenceCorpus c;
  c.reconstruction = program_list(j, "reconstruction");
  c.tasks = program_list(j, "tasks");
  const std::vector<std::string> order = {"WHILE", "IFELSE+WHILE", "2IF+IFELSE", "WHILE+2IF+IFELSE"};
  std::stable_sort(c.reconstruction.begin(), c.reconstruction.end(), [&](const auto& a, const auto& b) {
    auto rank = [&](const std::string& n) {
      return static_cast<size_t>(std::find(order.begin(), order.end(), n) - order.begin());
    };
    return rank(a.first) < rank(b.first);
  });
  return c;
}

ReferenceCorpus load_corpus(const std::filesystem::path& path) { return parse_corpus(read_json(path)); }

const ReferenceCorpus& builtin_corpus() {
  static const ReferenceCorpus corpus = parse_corpus(nlohmann::json::parse(kReferencePrograms));
  return corpus;
}

SearchPresets SearchPresets::parse(const nlohmann::json& j) {
  SearchPresets p;
  p.raw_ = j;
  for (const char* key : {"reconstruction", "tasks"}) {
    for (const auto& [name, entry] : j.at("cem").at(key).items()) {
      const std::string err = entry.get<search::CemConfig>().validate();
      if (!err.empty()) throw CorpusError("preset " + name + ": " + err);
    }
  }
  return p;
}

SearchPresets SearchPresets::load(const std::filesystem::path& path) { return parse(read_json(path)); }

const SearchPresets& SearchPresets::builtin() {
  static const SearchPresets presets = parse(nlohmann::json::parse(kSearchPresets));
  return presets;
}

search::CemConfig SearchPresets::cem(PresetDomain domain, const std::string& name) const {
  const char* key = domain == PresetDomain::kReconstruction ? "reconstruction" : "tasks";
  const std::string canonical = domain == PresetDomain::kTask ? std::string(task_name(task_from_name(name))) : name;
  const auto& table = raw_.at("cem").at(key);
  if (!table.contains(canonical)) throw CorpusError("no CEM preset for '" + name + "'");
  search::CemConfig cfg = table.at(canonical).get<search::CemConfig>();
  cfg.max_reward = domain == PresetDomain::kReconstruction ? 1.1 : 1.0;
  return cfg;
}

RandomPreset SearchPresets::random(const std::string& method, PresetDomain domain, const std::string& name) const {
  if (!raw_.at("random").contains(method)) throw CorpusError("unknown random-search method '" + method + "'");
  const auto& m = raw_.at("random").at(method);
  const char* key = domain == PresetDomain::kReconstruction ? "reconstruction" : "tasks";
  const std::string canonical = domain == PresetDomain::kTask ? std::string(task_name(task_from_name(name))) : name;
  if (!m.at(key).contains(canonical)) throw CorpusError("no " + method + " preset for '" + name + "'");
  const auto& e = m.at(key).at(canonical);
  RandomPreset out;
  out.samples = m.at("samples").get<int>();
  out.sigma = e.at("sigma").get<double>();
  out.init = search::init_from_name(e.at("init").get<std::string>());
  return out;
}

}  // namespace progsynth::harness
