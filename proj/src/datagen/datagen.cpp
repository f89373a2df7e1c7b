// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/datagen.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"
#include "progsynth/dsl/token.hpp"

namespace progsynth::datagen {

namespace {

using dsl::Block;
using dsl::Condition;
using dsl::Statement;

enum class Slot { kWhile, kRepeat, kSplit, kAction, kIf, kIfElse };

class Sampler {
 public:
  Sampler(const GenConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

  Block slot(int construct_depth, int split_depth) {
    Block out;
    fill(out, construct_depth, split_depth);
    return out;
  }

 private:
  Slot draw(int construct_depth, int split_depth) {
    const SlotProbabilities& p = cfg_.probs;
    const bool nest = construct_depth < cfg_.max_construct_depth;
    const bool split = split_depth < cfg_.max_split_depth;
    const std::array<std::pair<Slot, double>, 6> options{{
        {Slot::kWhile, nest ? p.loop_while : 0.0},
        {Slot::kRepeat, nest ? p.repeat : 0.0},
        {Slot::kSplit, split ? p.split : 0.0},
        {Slot::kAction, p.action},
        {Slot::kIf, nest ? p.when : 0.0},
        {Slot::kIfElse, nest ? p.when_else : 0.0},
    }};
    double total = 0.0;
    for (const auto& o : options) total += o.second;
    double u = uniform_real(rng_) * total;
    for (const auto& o : options) {
      if (o.second <= 0.0) continue;
      if (u < o.second) return o.first;
      u -= o.second;
    }
    return Slot::kAction;
  }

  Condition condition() {
    Condition c;
    c.sensor = static_cast<dsl::Sensor>(uniform_int(rng_, 0, dsl::kNumSensors - 1));
    c.negated = uniform_real(rng_) < cfg_.negation_prob;
    return c;
  }

  void fill(Block& out, int cd, int sd) {
    switch (draw(cd, sd)) {
      case Slot::kAction:
        out.push_back(Statement::act(static_cast<Action>(uniform_int(rng_, 0, kNumActions - 1))));
        break;
      case Slot::kSplit:
        fill(out, cd, sd + 1);
        fill(out, cd, sd + 1);
        break;
      case Slot::kWhile: {
        const Condition c = condition();
        out.push_back(Statement::loop_while(c, slot(cd + 1, sd)));
        break;
      }
      case Slot::kRepeat: {
        const int n = uniform_int(rng_, 0, dsl::kMaxRepeat);
        out.push_back(Statement::repeat(n, slot(cd + 1, sd)));
        break;
      }
      case Slot::kIf: {
        const Condition c = condition();
        out.push_back(Statement::when(c, slot(cd + 1, sd)));
        break;
      }
      case Slot::kIfElse: {
        const Condition c = condition();
        Block then_body = slot(cd + 1, sd);
        Block else_body = slot(cd + 1, sd);
        out.push_back(Statement::when_else(c, std::move(then_body), std::move(else_body)));
        break;
      }
    }
  }

  const GenConfig& cfg_;
  Rng& rng_;
};

bool covers(const std::vector<BranchEvent>& have, const std::vector<BranchEvent>& need) {
  return std::includes(have.begin(), have.end(), need.begin(), need.end());
}

std::vector<BranchEvent> merged(const std::vector<BranchEvent>& a, const std::vector<BranchEvent>& b) {
  std::vector<BranchEvent> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// ---- binary helpers -------------------------------------------------------

constexpr char kRolloutMagic[4] = {'P', 'S', 'R', 'O'};
constexpr uint32_t kRolloutVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw std::runtime_error("rollout file truncated");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(size_t n) {
    if (pos_ + n > data_.size()) throw std::runtime_error("rollout file truncated");
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  size_t pos_ = 0;
};

void put_grid(std::string& out, const GridState& g) {
  put<uint16_t>(out, static_cast<uint16_t>(g.height()));
  put<uint16_t>(out, static_cast<uint16_t>(g.width()));
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      put<uint8_t>(out, static_cast<uint8_t>((g.is_wall(r, c) ? 0x80 : 0) | g.markers(r, c)));
    }
  }
  put<uint16_t>(out, static_cast<uint16_t>(g.agent().row));
  put<uint16_t>(out, static_cast<uint16_t>(g.agent().col));
  put<uint8_t>(out, static_cast<uint8_t>(g.agent_dir()));
}

GridState get_grid(Reader& in) {
  const int h = in.get<uint16_t>();
  const int w = in.get<uint16_t>();
  GridState g(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const uint8_t cell = in.get<uint8_t>();
      if (!g.is_boundary(r, c)) g.set_wall(r, c, (cell & 0x80) != 0);
      g.set_markers(r, c, cell & 0x7f);
    }
  }
  const int row = in.get<uint16_t>();
  const int col = in.get<uint16_t>();
  g.set_agent(row, col, static_cast<Direction>(in.get<uint8_t>()));
  if (!g.valid()) throw std::runtime_error("rollout file holds an invalid grid: " + g.validate());
  return g;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string GenConfig::validate() const {
  const SlotProbabilities& p = probs;
  for (double v : {p.loop_while, p.repeat, p.split, p.action, p.when, p.when_else}) {
    if (v < 0.0) return "slot probabilities must be non-negative";
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) return "slot probabilities must sum to 1";
  if (p.action <= 0.0) return "action probability must be positive";
  if (max_construct_depth < 0 || max_split_depth < 0) return "depth limits must be non-negative";
  if (max_program_tokens < 5) return "max_program_tokens must be at least 5";
  if (max_sample_attempts < 1) return "max_sample_attempts must be positive";
  if (negation_prob < 0.0 || negation_prob > 1.0) return "negation_prob must be in [0, 1]";
  if (rollouts_per_program < 1) return "rollouts_per_program must be positive";
  if (exec_cap < 1) return "exec_cap must be positive";
  if (coverage_attempts < 0) return "coverage_attempts must be non-negative";
  if (world.height < 3 || world.width < 3) return "world must be at least 3x3";
  if (world.wall_density < 0.0 || world.wall_density >= 1.0) return "wall_density must be in [0, 1)";
  if (world.marker_density < 0.0 || world.marker_density > 1.0) return "marker_density must be in [0, 1]";
  if (train_size < 0 || val_size < 0 || test_size < 0) return "split sizes must be non-negative";
  return {};
}

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = nlohmann::json{
      {"probs",
       {{"WHILE", c.probs.loop_while},
        {"REPEAT", c.probs.repeat},
        {"STMT_STMT", c.probs.split},
        {"ACTION", c.probs.action},
        {"IF", c.probs.when},
        {"IFELSE", c.probs.when_else}}},
      {"max_construct_depth", c.max_construct_depth},
      {"max_split_depth", c.max_split_depth},
      {"max_program_tokens", c.max_program_tokens},
      {"max_sample_attempts", c.max_sample_attempts},
      {"negation_prob", c.negation_prob},
      {"rollouts_per_program", c.rollouts_per_program},
      {"exec_cap", c.exec_cap},
      {"coverage_attempts", c.coverage_attempts},
      {"world",
       {{"height", c.world.height},
        {"width", c.world.width},
        {"wall_density", c.world.wall_density},
        {"marker_density", c.world.marker_density}}},
      {"train_size", c.train_size},
      {"val_size", c.val_size},
      {"test_size", c.test_size},
  };
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  if (j.contains("probs")) {
    const auto& p = j.at("probs");
    c.probs.loop_while = p.value("WHILE", c.probs.loop_while);
    c.probs.repeat = p.value("REPEAT", c.probs.repeat);
    c.probs.split = p.value("STMT_STMT", c.probs.split);
    c.probs.action = p.value("ACTION", c.probs.action);
    c.probs.when = p.value("IF", c.probs.when);
    c.probs.when_else = p.value("IFELSE", c.probs.when_else);
  }
  c.max_construct_depth = j.value("max_construct_depth", c.max_construct_depth);
  c.max_split_depth = j.value("max_split_depth", c.max_split_depth);
  c.max_program_tokens = j.value("max_program_tokens", c.max_program_tokens);
  c.max_sample_attempts = j.value("max_sample_attempts", c.max_sample_attempts);
  c.negation_prob = j.value("negation_prob", c.negation_prob);
  c.rollouts_per_program = j.value("rollouts_per_program", c.rollouts_per_program);
  c.exec_cap = j.value("exec_cap", c.exec_cap);
  c.coverage_attempts = j.value("coverage_attempts", c.coverage_attempts);
  if (j.contains("world")) {
    const auto& w = j.at("world");
    c.world.height = w.value("height", c.world.height);
    c.world.width = w.value("width", c.world.width);
    c.world.wall_density = w.value("wall_density", c.world.wall_density);
    c.world.marker_density = w.value("marker_density", c.world.marker_density);
  }
  c.train_size = j.value("train_size", c.train_size);
  c.val_size = j.value("val_size", c.val_size);
  c.test_size = j.value("test_size", c.test_size);
  c.workers = j.value("workers", c.workers);
}

dsl::Program sample_program(const GenConfig& cfg, Rng& rng) {
  Sampler sampler(cfg, rng);
  for (int attempt = 0; attempt < cfg.max_sample_attempts; ++attempt) {
    dsl::Program p{sampler.slot(0, 0)};
    if (static_cast<int>(dsl::to_tokens(p).size()) <= cfg.max_program_tokens) {
      dsl::number_nodes(p);
      return p;
    }
  }
  throw GenerationError("no program within " + std::to_string(cfg.max_program_tokens) + " tokens after " +
                        std::to_string(cfg.max_sample_attempts) + " attempts");
}

GridState sample_world(const WorldSamplerConfig& cfg, Rng& rng) {
  GridState g(cfg.height, cfg.width);
  std::vector<Cell> open;
  for (int r = 1; r < cfg.height - 1; ++r) {
    for (int c = 1; c < cfg.width - 1; ++c) {
      if (uniform_real(rng) < cfg.wall_density) {
        g.set_wall(r, c, true);
        continue;
      }
      open.push_back({r, c});
      if (uniform_real(rng) < cfg.marker_density) g.set_markers(r, c, 1);
    }
  }
  if (open.empty()) {
    const Cell c{uniform_int(rng, 1, cfg.height - 2), uniform_int(rng, 1, cfg.width - 2)};
    g.set_wall(c.row, c.col, false);
    open.push_back(c);
  }
  const Cell a = open[uniform_int(rng, 0, static_cast<int>(open.size()) - 1)];
  g.set_agent(a.row, a.col, static_cast<Direction>(uniform_int(rng, 0, 3)));
  return g;
}

std::optional<std::vector<Rollout>> collect_rollouts(const dsl::Program& program, const GenConfig& cfg, Rng& rng) {
  const std::vector<BranchEvent> need = dsl::required_branches(program);
  const size_t want = static_cast<size_t>(cfg.rollouts_per_program);
  std::vector<Rollout> essential;
  std::vector<Rollout> filler;
  std::vector<BranchEvent> have;
  const int draws = cfg.rollouts_per_program + cfg.coverage_attempts;
  for (int d = 0; d < draws; ++d) {
    Rollout r = dsl::execute(program, sample_world(cfg.world, rng), cfg.exec_cap);
    std::vector<BranchEvent> next = merged(have, r.branch_events);
    if (next.size() > have.size()) {
      if (essential.size() == want) return std::nullopt;
      have = std::move(next);
      essential.push_back(std::move(r));
    } else if (filler.size() < want) {
      filler.push_back(std::move(r));
    }
    if (covers(have, need) && essential.size() + filler.size() >= want) {
      std::vector<Rollout> out = std::move(essential);
      for (size_t i = 0; out.size() < want; ++i) out.push_back(std::move(filler[i]));
      return out;
    }
  }
  return std::nullopt;
}

std::optional<DatasetRecord> make_candidate(const GenConfig& cfg, uint64_t seed, int64_t index) {
  Rng rng(derive_seed(seed, static_cast<uint64_t>(index)));
  DatasetRecord rec;
  rec.program = sample_program(cfg, rng);
  auto rollouts = collect_rollouts(rec.program, cfg, rng);
  if (!rollouts) return std::nullopt;
  rec.rollouts = std::move(*rollouts);
  rec.text = dsl::to_text(rec.program);
  rec.id = fnv1a(rec.text);
  return rec;
}

const Split& Dataset::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

Dataset build_dataset(const GenConfig& cfg, uint64_t seed) {
  if (const std::string err = cfg.validate(); !err.empty()) throw std::invalid_argument(err);
  Dataset ds;
  ds.cfg = cfg;
  ds.seed = seed;
  const int target = cfg.total();
  const int workers = cfg.workers > 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  const int64_t batch = 64 * static_cast<int64_t>(workers);
  const int64_t max_candidates = 1000 * static_cast<int64_t>(std::max(target, 1));

  std::vector<DatasetRecord> accepted;
  std::unordered_set<std::string> seen;
  int64_t next = 0;
  while (static_cast<int>(accepted.size()) < target) {
    if (next >= max_candidates) throw GenerationError("dataset generation is not converging");
    std::vector<std::optional<DatasetRecord>> slots(static_cast<size_t>(batch));
    auto work = [&](int w) {
      for (int64_t i = w; i < batch; i += workers) slots[i] = make_candidate(cfg, seed, next + i);
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (std::thread& t : pool) t.join();
    }
    // Merge in index order so the result is independent of scheduling.
    for (int64_t i = 0; i < batch && static_cast<int>(accepted.size()) < target; ++i) {
      ++ds.candidates;
      if (!slots[i] || !seen.insert(slots[i]->text).second) continue;
      accepted.push_back(std::move(*slots[i]));
    }
    next += batch;
  }
  auto take = [&](Split& s, size_t from, int n) {
    s.records.assign(std::make_move_iterator(accepted.begin() + from),
                     std::make_move_iterator(accepted.begin() + from + n));
  };
  take(ds.train, 0, cfg.train_size);
  take(ds.val, cfg.train_size, cfg.val_size);
  take(ds.test, cfg.train_size + cfg.val_size, cfg.test_size);
  return ds;
}

std::string encode_rollouts(const std::vector<DatasetRecord>& records) {
  std::string out(kRolloutMagic, 4);
  put<uint32_t>(out, kRolloutVersion);
  put<uint64_t>(out, dsl::vocab_hash());
  put<uint64_t>(out, records.size());
  for (const DatasetRecord& rec : records) {
    put<uint32_t>(out, static_cast<uint32_t>(rec.rollouts.size()));
    for (const Rollout& r : rec.rollouts) {
      put_grid(out, r.initial_state);
      put<uint32_t>(out, static_cast<uint32_t>(r.size()));
      for (size_t t = 0; t < r.size(); ++t) {
        put<uint8_t>(out, static_cast<uint8_t>(r.actions[t]));
        put<uint8_t>(out, r.perceptions[t].bits());
      }
    }
  }
  return out;
}

std::vector<std::vector<Rollout>> decode_rollouts(const std::string& bytes, const std::vector<dsl::Program>& programs,
                                                  int exec_cap) {
  Reader in(bytes);
  const std::string magic = in.bytes(4);
  if (magic != std::string(kRolloutMagic, 4)) throw std::runtime_error("not a rollout file");
  if (in.get<uint32_t>() != kRolloutVersion) throw std::runtime_error("unsupported rollout file version");
  if (in.get<uint64_t>() != dsl::vocab_hash()) throw std::runtime_error("rollout file vocabulary mismatch");
  const uint64_t n = in.get<uint64_t>();
  if (n != programs.size()) throw std::runtime_error("rollout file and program list differ in length");
  std::vector<std::vector<Rollout>> out(n);
  for (uint64_t i = 0; i < n; ++i) {
    const uint32_t k = in.get<uint32_t>();
    for (uint32_t j = 0; j < k; ++j) {
      const GridState init = get_grid(in);
      const uint32_t len = in.get<uint32_t>();
      Rollout r = dsl::execute(programs[i], init, exec_cap);
      if (r.size() != len) throw std::runtime_error("stored rollout disagrees with re-execution");
      for (uint32_t t = 0; t < len; ++t) {
        const auto a = static_cast<Action>(in.get<uint8_t>());
        const uint8_t bits = in.get<uint8_t>();
        if (a != r.actions[t] || bits != r.perceptions[t].bits()) {
          throw std::runtime_error("stored rollout disagrees with re-execution");
        }
      }
      out[i].push_back(std::move(r));
    }
  }
  if (!in.at_end()) throw std::runtime_error("trailing bytes in rollout file");
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "progsynth-dataset";
  manifest["version"] = 1;
  manifest["seed"] = ds.seed;
  manifest["config"] = ds.cfg;
  manifest["vocab_hash"] = hex64(dsl::vocab_hash());
  manifest["candidates"] = ds.candidates;
  for (const Split* s : {&ds.train, &ds.val, &ds.test}) {
    std::string programs;
    for (const DatasetRecord& r : s->records) programs += r.text + "\n";
    const std::string rollouts = encode_rollouts(s->records);
    write_file(dir / (s->name + ".programs.txt"), programs);
    write_file(dir / (s->name + ".rollouts.bin"), rollouts);
    manifest["splits"][s->name] = {
        {"count", s->records.size()},
        {"programs_fnv1a", hex64(fnv1a(programs))},
        {"rollouts_fnv1a", hex64(fnv1a(rollouts))},
    };
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const nlohmann::json manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  if (manifest.value("format", "") != "progsynth-dataset") throw std::runtime_error("not a dataset manifest");
  if (manifest.at("vocab_hash").get<std::string>() != hex64(dsl::vocab_hash())) {
    throw std::runtime_error("dataset vocabulary does not match this build");
  }
  Dataset ds;
  ds.seed = manifest.at("seed").get<uint64_t>();
  ds.cfg = manifest.at("config").get<GenConfig>();
  ds.candidates = manifest.value("candidates", int64_t{0});
  for (Split* s : {&ds.train, &ds.val, &ds.test}) {
    const nlohmann::json& meta = manifest.at("splits").at(s->name);
    const std::string programs = read_file(dir / (s->name + ".programs.txt"));
    const std::string rollouts = read_file(dir / (s->name + ".rollouts.bin"));
    if (hex64(fnv1a(programs)) != meta.at("programs_fnv1a").get<std::string>() ||
        hex64(fnv1a(rollouts)) != meta.at("rollouts_fnv1a").get<std::string>()) {
      throw std::runtime_error("content hash mismatch in split " + s->name);
    }
    std::vector<dsl::Program> parsed;
    std::istringstream lines(programs);
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      DatasetRecord rec;
      rec.text = line;
      rec.program = dsl::parse(line);
      rec.id = fnv1a(line);
      parsed.push_back(rec.program);
      s->records.push_back(std::move(rec));
    }
    auto decoded = decode_rollouts(rollouts, parsed, ds.cfg.exec_cap);
    for (size_t i = 0; i < decoded.size(); ++i) s->records[i].rollouts = std::move(decoded[i]);
    if (s->records.size() != meta.at("count").get<size_t>()) throw std::runtime_error("split count mismatch");
  }
  return ds;
}

}  // namespace progsynth::datagen
