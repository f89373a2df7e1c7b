// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "progsynth/dsl/parser.hpp"
#include "progsynth/embedding/network.hpp"
#include "progsynth/rng.hpp"
#include "progsynth/search/program_search.hpp"

namespace progsynth::harness {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

bool is_random_method(const std::string& m) { return m == "rand-8" || m == "rand-64"; }

void check_method(const std::string& m, bool allow_ground_truth) {
  if (m == "cem" || is_random_method(m)) return;
  if (allow_ground_truth && m == "ground-truth") return;
  throw ExperimentError("unknown method '" + m + "'");
}

search::SearchResult search_with(const embedding::Params& params, const search::ProgramReward& reward,
                                 const ExperimentConfig& cfg, PresetDomain domain, const std::string& name,
                                 uint64_t seed) {
  const search::BatchEvaluator eval = search::decoder_evaluator(params, reward, 1);
  const int dim = params.dims.latent;
  if (is_random_method(cfg.method)) {
    const RandomPreset p = SearchPresets::builtin().random(cfg.method, domain, name);
    return search::random_search(eval, dim, p.samples, p.sigma, p.init, seed);
  }
  return search::cem_search(eval, dim, resolve_cem(cfg, domain, name), seed);
}

std::vector<std::string> selected(const std::vector<std::string>& wanted, const std::vector<std::string>& all) {
  if (wanted.empty()) return all;
  return wanted;
}

std::vector<std::string> all_task_names() {
  std::vector<std::string> out;
  for (TaskKind k : kAllTasks) out.emplace_back(task_name(k));
  return out;
}

}  // namespace

std::string ExperimentConfig::validate() const {
  if (seeds < 1) return "seeds must be >= 1";
  if (n_configs < 1) return "n_configs must be >= 1";
  if (workers < 0) return "workers must be >= 0";
  if (!cem_overrides.is_object()) return "cem_overrides must be an object";
  if (large_grid < 4) return "large_grid must be >= 4";
  if (pool_size < 1) return "pool_size must be >= 1";
  if (steps < 2) return "steps must be >= 2";
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) return "fractions must lie in (0, 1]";
  }
  return {};
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"checkpoint", c.checkpoint.string()},
       {"targets", c.targets},
       {"method", c.method},
       {"cem_overrides", c.cem_overrides},
       {"seeds", c.seeds},
       {"seed", c.seed},
       {"n_configs", c.n_configs},
       {"workers", c.workers},
       {"large_grid", c.large_grid},
       {"programs", c.programs},
       {"results", c.results.string()},
       {"task", c.task},
       {"fractions", c.fractions},
       {"pool_size", c.pool_size},
       {"program_a", c.program_a},
       {"program_b", c.program_b},
       {"steps", c.steps},
       {"dataset", c.dataset.string()},
       {"split", c.split}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  static const std::set<std::string> known = {
      "checkpoint", "targets",   "method",    "cem_overrides", "seeds",     "seed",      "n_configs",
      "workers",    "large_grid", "programs", "results",       "task",      "fractions", "pool_size",
      "program_a",  "program_b", "steps",     "dataset",       "split"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ExperimentError("unknown config key '" + item.key() + "'");
  }
  c.checkpoint = j.value("checkpoint", c.checkpoint.string());
  c.targets = j.value("targets", c.targets);
  c.method = j.value("method", c.method);
  c.cem_overrides = j.value("cem_overrides", c.cem_overrides);
  c.seeds = j.value("seeds", c.seeds);
  c.seed = j.value("seed", c.seed);
  c.n_configs = j.value("n_configs", c.n_configs);
  c.workers = j.value("workers", c.workers);
  c.large_grid = j.value("large_grid", c.large_grid);
  c.programs = j.value("programs", c.programs);
  c.results = j.value("results", c.results.string());
  c.task = j.value("task", c.task);
  c.fractions = j.value("fractions", c.fractions);
  c.pool_size = j.value("pool_size", c.pool_size);
  c.program_a = j.value("program_a", c.program_a);
  c.program_b = j.value("program_b", c.program_b);
  c.steps = j.value("steps", c.steps);
  c.dataset = j.value("dataset", c.dataset.string());
  c.split = j.value("split", c.split);
}

void to_json(nlohmann::json& j, const ResultEntry& e) {
  j = {{"method", e.method},   {"target", e.target},   {"seed_index", e.seed_index},
       {"seed", e.seed},       {"reward", e.reward},   {"search_reward", e.search_reward},
       {"program", e.program}, {"iterations", e.iterations}, {"converged", e.converged}};
}

void from_json(const nlohmann::json& j, ResultEntry& e) {
  e.method = j.at("method").get<std::string>();
  e.target = j.at("target").get<std::string>();
  e.seed_index = j.value("seed_index", 0);
  e.seed = j.value("seed", uint64_t{0});
  e.reward = j.at("reward").get<double>();
  e.search_reward = j.value("search_reward", e.reward);
  e.program = j.at("program").get<std::string>();
  e.iterations = j.value("iterations", 0);
  e.converged = j.value("converged", false);
}

void to_json(nlohmann::json& j, const ResultTable& t) { j = {{"entries", t.entries}}; }

void from_json(const nlohmann::json& j, ResultTable& t) {
  t.entries = j.at("entries").get<std::vector<ResultEntry>>();
}

std::vector<ResultSummary> ResultTable::summary() const {
  std::vector<ResultSummary> out;
  std::vector<std::vector<double>> values;
  for (const ResultEntry& e : entries) {
    size_t i = 0;
    while (i < out.size() && !(out[i].method == e.method && out[i].target == e.target)) ++i;
    if (i == out.size()) {
      out.push_back({e.method, e.target, 0, 0.0, 0.0});
      values.emplace_back();
    }
    values[i].push_back(e.reward);
  }
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].n = static_cast<int>(values[i].size());
    out[i].mean = mean_of(values[i]);
    out[i].stddev = stddev_of(values[i]);
  }
  return out;
}

double ResultTable::average(const std::string& method) const {
  std::vector<double> means;
  for (const ResultSummary& s : summary()) {
    if (s.method == method) means.push_back(s.mean);
  }
  return mean_of(means);
}

std::string ResultTable::entries_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "method,target,seed_index,seed,reward,search_reward,iterations,converged,program\n";
  for (const ResultEntry& e : entries) {
    out << e.method << ',' << e.target << ',' << e.seed_index << ',' << e.seed << ',' << e.reward << ','
        << e.search_reward << ',' << e.iterations << ',' << (e.converged ? 1 : 0) << ',' << quoted(e.program)
        << '\n';
  }
  return out.str();
}

std::string ResultTable::summary_csv() const {
  std::ostringstream out;
  out << "method,target,n,mean,std\n";
  std::vector<std::string> methods;
  for (const ResultSummary& s : summary()) {
    out << s.method << ',' << s.target << ',' << s.n << ',' << fmt(s.mean) << ',' << fmt(s.stddev) << '\n';
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end()) methods.push_back(s.method);
  }
  for (const std::string& m : methods) out << m << ",average,,"<< fmt(average(m)) << ",\n";
  return out.str();
}

search::CemConfig resolve_cem(const ExperimentConfig& cfg, PresetDomain domain, const std::string& target,
                              const SearchPresets& presets) {
  search::CemConfig base = presets.cem(domain, target);
  nlohmann::json j = base;
  for (const auto& [k, v] : cfg.cem_overrides.items()) {
    if (!j.contains(k)) throw ExperimentError("unknown CEM setting '" + k + "'");
    j[k] = v;
  }
  search::CemConfig out = j.get<search::CemConfig>();
  if (const std::string err = out.validate(); !err.empty()) throw ExperimentError("CEM config: " + err);
  return out;
}

uint64_t run_seed(const ExperimentConfig& cfg, int index) { return cfg.seed + static_cast<uint64_t>(index); }

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int t = std::min(n, workers > 0 ? workers : hw);
  if (t <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr error;
  int next = 0;
  auto loop = [&] {
    for (;;) {
      int i = 0;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n || error) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k) pool.emplace_back(loop);
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

ExperimentResult run_reconstruct(const embedding::Params& params, const ExperimentConfig& cfg,
                                 const ReferenceCorpus& corpus) {
  if (const std::string err = cfg.validate(); !err.empty()) throw ExperimentError(err);
  check_method(cfg.method, false);
  const std::vector<std::string> targets = selected(cfg.targets, corpus.target_names());
  const std::vector<GridState> states = search::reconstruction_states(cfg.seed, cfg.n_configs);
  const int jobs = static_cast<int>(targets.size()) * cfg.seeds;
  ExperimentResult out;
  out.table.entries.resize(static_cast<size_t>(jobs));
  out.logs.resize(static_cast<size_t>(jobs));
  parallel_for(jobs, cfg.workers, [&](int job) {
    const std::string& target = targets[static_cast<size_t>(job / cfg.seeds)];
    const int k = job % cfg.seeds;
    const uint64_t seed = run_seed(cfg, k);
    const auto reward = search::reconstruction_reward(dsl::parse(corpus.target(target)), states);
    search::SearchResult res = search_with(params, reward, cfg, PresetDomain::kReconstruction, target, seed);
    out.table.entries[static_cast<size_t>(job)] = {cfg.method, target, k, seed, res.best_reward, res.best_reward,
                                                    res.best_program, res.iterations, res.converged};
    out.logs[static_cast<size_t>(job)] = {target + "_seed" + std::to_string(k), std::move(res)};
  });
  return out;
}

ExperimentResult run_solve(const embedding::Params* params, const ExperimentConfig& cfg,
                           const ReferenceCorpus& corpus) {
  if (const std::string err = cfg.validate(); !err.empty()) throw ExperimentError(err);
  check_method(cfg.method, true);
  const bool direct = cfg.method == "ground-truth";
  if (!direct && params == nullptr) throw ExperimentError("method '" + cfg.method + "' needs a checkpoint");
  std::vector<std::string> tasks;
  for (const std::string& t : selected(cfg.targets, all_task_names())) tasks.emplace_back(task_name(task_from_name(t)));
  const int jobs = static_cast<int>(tasks.size()) * cfg.seeds;
  ExperimentResult out;
  out.table.entries.resize(static_cast<size_t>(jobs));
  std::vector<std::optional<NamedLog>> logs(static_cast<size_t>(jobs));
  parallel_for(jobs, cfg.workers, [&](int job) {
    const std::string& task = tasks[static_cast<size_t>(job / cfg.seeds)];
    const int k = job % cfg.seeds;
    const uint64_t seed = run_seed(cfg, k);
    const TaskSpec spec = default_spec(task_from_name(task));
    const auto eval_set = search::task_instances(spec, cfg.n_configs, derive_seed(cfg.seed, 0xe7a1));
    ResultEntry& e = out.table.entries[static_cast<size_t>(job)];
    e = {cfg.method, task, k, seed, 0.0, 0.0, {}, 0, false};
    if (direct) {
      const dsl::Program gt = dsl::parse(corpus.task_program(task));
      e.program = dsl::to_text(gt);
      e.reward = search::mean_return(gt, eval_set);
      e.search_reward = e.reward;
      return;
    }
    const auto train_set = search::task_instances(spec, cfg.n_configs, derive_seed(seed, 0x7a1));
    search::SearchResult res =
        search_with(*params, search::task_return(train_set), cfg, PresetDomain::kTask, task, seed);
    e.program = res.best_program;
    e.search_reward = res.best_reward;
    e.reward = search::mean_return(dsl::parse(res.best_program), eval_set);
    e.iterations = res.iterations;
    e.converged = res.converged;
    logs[static_cast<size_t>(job)] = NamedLog{task + "_seed" + std::to_string(k), std::move(res)};
  });
  for (auto& l : logs) {
    if (l) out.logs.push_back(std::move(*l));
  }
  return out;
}

std::string GeneralizeResult::csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "method,task,seed_index,small_reward,large_reward,program\n";
  for (const GeneralizeRow& r : rows) {
    out << r.method << ',' << r.task << ',' << r.seed_index << ',' << r.small_reward << ',' << r.large_reward << ','
        << quoted(r.program) << '\n';
  }
  return out.str();
}

GeneralizeResult run_generalize(const ExperimentConfig& cfg, const ReferenceCorpus& corpus) {
  if (const std::string err = cfg.validate(); !err.empty()) throw ExperimentError(err);
  std::vector<GeneralizeRow> rows;
  if (!cfg.results.empty()) {
    std::ifstream in(cfg.results);
    if (!in) throw ExperimentError("cannot open " + cfg.results.string());
    const ResultTable table = nlohmann::json::parse(in).get<ResultTable>();
    for (const ResultEntry& e : table.entries) rows.push_back({e.method, e.target, e.seed_index, e.program, 0, 0});
  } else if (!cfg.programs.empty()) {
    for (const auto& [task, text] : cfg.programs) {
      rows.push_back({"given", std::string(task_name(task_from_name(task))), 0, text, 0, 0});
    }
  } else {
    const std::vector<std::string> defaults = {"StairClimber", "Maze", "FourCorner", "TopOff", "Harvester"};
    for (const std::string& t : selected(cfg.targets, defaults)) {
      const std::string name(task_name(task_from_name(t)));
      rows.push_back({"ground-truth", name, 0, corpus.task_program(name), 0, 0});
    }
  }
  parallel_for(static_cast<int>(rows.size()), cfg.workers, [&](int i) {
    GeneralizeRow& r = rows[static_cast<size_t>(i)];
    const TaskKind kind = task_from_name(r.task);
    const dsl::Program p = dsl::parse(r.program);
    const uint64_t base = derive_seed(cfg.seed, 0xe7a1);
    r.small_reward = search::mean_return(p, search::task_instances(default_spec(kind), cfg.n_configs, base));
    const TaskSpec large = scaled_spec(kind, cfg.large_grid, cfg.large_grid);
    r.large_reward = search::mean_return(p, search::task_instances(large, cfg.n_configs, base));
  });
  return {std::move(rows)};
}

TaskInstance top_off_config(uint32_t mask) {
  TaskSpec spec = default_spec(TaskKind::kTopOff);
  const int cells = spec.width - 3;
  if (mask >> cells) throw std::invalid_argument("TopOff mask has bits beyond the candidate cells");
  spec.topoff_marker_prob = 0.0;
  TaskInstance inst = sample_task(spec, mask);
  const int row = spec.height - 2;
  for (int i = 0; i < cells; ++i) {
    if (mask >> i & 1u) {
      inst.initial.set_markers(row, 1 + i, 1);
      inst.target_cells.push_back({row, 1 + i});
    }
  }
  inst.total_markers = static_cast<int>(inst.target_cells.size());
  return inst;
}

TaskInstance harvester_config(uint64_t mask) {
  const TaskSpec spec = default_spec(TaskKind::kHarvester);
  const int inner_w = spec.width - 2;
  const int cells = (spec.height - 2) * inner_w;
  if (mask == 0 || (cells < 64 && mask >> cells)) throw std::invalid_argument("invalid Harvester mask");
  TaskInstance inst = sample_task(spec, mask);
  for (int i = 0; i < cells; ++i) inst.initial.set_markers(1 + i / inner_w, 1 + i % inner_w, (mask >> i) & 1u);
  inst.total_markers = inst.initial.total_markers();
  return inst;
}

std::vector<TaskInstance> config_pool(TaskKind task, int pool_size, uint64_t seed) {
  std::vector<TaskInstance> out;
  if (task == TaskKind::kTopOff) {
    const int cells = default_spec(task).width - 3;
    for (uint32_t m = 0; m < (1u << cells); ++m) out.push_back(top_off_config(m));
    return out;
  }
  if (task != TaskKind::kHarvester) throw ExperimentError("configuration pools exist for TopOff and Harvester only");
  const TaskSpec spec = default_spec(task);
  const int cells = (spec.height - 2) * (spec.width - 2);
  Rng rng(derive_seed(seed, 0x9001));
  std::set<uint64_t> seen;
  const uint64_t full = cells >= 64 ? ~uint64_t{0} : (uint64_t{1} << cells) - 1;
  while (static_cast<int>(out.size()) < pool_size) {
    const uint64_t m = rng() & full;
    if (m == 0 || !seen.insert(m).second) continue;
    out.push_back(harvester_config(m));
  }
  return out;
}

std::vector<int> config_subset(int n, double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ExperimentError("fraction must lie in (0, 1]");
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, 0x5b5e7));
  std::shuffle(idx.begin(), idx.end(), rng);
  const int k = std::clamp(static_cast<int>(std::lround(fraction * n)), 1, n);
  idx.resize(static_cast<size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string UnseenResult::csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "task,fraction,seed_index,train_configs,train_reward,pool_reward,program\n";
  for (const UnseenRow& r : rows) {
    out << task << ',' << r.fraction << ',' << r.seed_index << ',' << r.train_configs << ',' << r.train_reward << ','
        << r.pool_reward << ',' << quoted(r.program) << '\n';
  }
  return out.str();
}

std::string UnseenResult::summary_csv() const {
  std::vector<double> fractions;
  for (const UnseenRow& r : rows) {
    if (std::find(fractions.begin(), fractions.end(), r.fraction) == fractions.end()) fractions.push_back(r.fraction);
  }
  auto values = [&](double f) {
    std::vector<double> v;
    for (const UnseenRow& r : rows) {
      if (r.fraction == f) v.push_back(r.pool_reward);
    }
    return v;
  };
  const double ref = mean_of(values(1.0));
  std::ostringstream out;
  out << "task,fraction,n,mean,std,change_pct\n";
  for (double f : fractions) {
    const std::vector<double> v = values(f);
    const double m = mean_of(v);
    out << task << ',' << f << ',' << v.size() << ',' << fmt(m) << ',' << fmt(stddev_of(v)) << ','
        << (ref != 0.0 ? fmt(100.0 * (m - ref) / ref) : std::string()) << '\n';
  }
  return out.str();
}

UnseenResult run_unseen_config(const embedding::Params& params, const ExperimentConfig& cfg) {
  if (const std::string err = cfg.validate(); !err.empty()) throw ExperimentError(err);
  check_method(cfg.method, false);
  const TaskKind kind = task_from_name(cfg.task);
  const std::string name(task_name(kind));
  const std::vector<TaskInstance> pool = config_pool(kind, cfg.pool_size, cfg.seed);
  std::vector<double> fractions = cfg.fractions;
  if (std::find(fractions.begin(), fractions.end(), 1.0) == fractions.end()) fractions.insert(fractions.begin(), 1.0);
  UnseenResult out;
  out.task = name;
  const int jobs = static_cast<int>(fractions.size()) * cfg.seeds;
  out.rows.resize(static_cast<size_t>(jobs));
  parallel_for(jobs, cfg.workers, [&](int job) {
    const double f = fractions[static_cast<size_t>(job / cfg.seeds)];
    const int k = job % cfg.seeds;
    const uint64_t seed = run_seed(cfg, k);
    const std::vector<int> subset = config_subset(static_cast<int>(pool.size()), f, seed);
    // Candidates are scored on a fixed draw of n_configs layouts from the training subset.
    Rng rng(derive_seed(seed, 0x7a1));
    std::vector<TaskInstance> train;
    for (int i = 0; i < cfg.n_configs; ++i) {
      train.push_back(pool[static_cast<size_t>(subset[static_cast<size_t>(
          uniform_int(rng, 0, static_cast<int>(subset.size()) - 1))])]);
    }
    const search::SearchResult res =
        search_with(params, search::task_return(train), cfg, PresetDomain::kTask, name, seed);
    const dsl::Program best = dsl::parse(res.best_program);
    std::vector<TaskInstance> train_all;
    for (int i : subset) train_all.push_back(pool[static_cast<size_t>(i)]);
    out.rows[static_cast<size_t>(job)] = {f,
                                          k,
                                          static_cast<int>(subset.size()),
                                          search::mean_return(best, train_all),
                                          search::mean_return(best, pool),
                                          res.best_program};
  });
  return out;
}

std::vector<InterpolationRow> run_interpolate(const embedding::Params& params, const std::string& program_a,
                                              const std::string& program_b, int steps) {
  if (steps < 2) throw ExperimentError("steps must be >= 2");
  const auto ta = dsl::to_tokens(dsl::parse(program_a));
  const auto tb = dsl::to_tokens(dsl::parse(program_b));
  const Eigen::VectorXd za = embedding::encode_one(params, ta).mu.col(0);
  const Eigen::VectorXd zb = embedding::encode_one(params, tb).mu.col(0);
  Eigen::MatrixXd z(za.size(), steps);
  std::vector<InterpolationRow> rows;
  for (int i = 0; i < steps; ++i) {
    // Both weights come straight from integers so swapping the endpoints is exactly symmetric.
    const double wb = static_cast<double>(i) / (steps - 1);
    const double wa = static_cast<double>(steps - 1 - i) / (steps - 1);
    z.col(i) = wa * za + wb * zb;
    rows.push_back({i, wb, {}});
  }
  const auto decoded = embedding::decode_batch(params, z, embedding::DecodeMode::kGreedy);
  for (int i = 0; i < steps; ++i) rows[static_cast<size_t>(i)].program = dsl::detokenize(decoded[static_cast<size_t>(i)].tokens);
  return rows;
}

std::string interpolation_csv(const std::vector<InterpolationRow>& rows) {
  std::ostringstream out;
  out << "index,weight_b,program\n";
  for (const InterpolationRow& r : rows) out << r.index << ',' << fmt(r.weight_b) << ',' << quoted(r.program) << '\n';
  return out.str();
}

std::string export_latents(const embedding::Params& params, const datagen::Split& split) {
  std::ostringstream out;
  out.precision(17);
  const int d = params.dims.latent;
  out << "id,program";
  for (int i = 0; i < d; ++i) out << ",z" << i;
  out << '\n';
  constexpr size_t kChunk = 256;
  std::vector<std::vector<dsl::Token>> tokens;
  tokens.reserve(split.records.size());
  for (const auto& r : split.records) tokens.push_back(dsl::to_tokens(r.program));
  for (size_t begin = 0; begin < tokens.size(); begin += kChunk) {
    const size_t end = std::min(tokens.size(), begin + kChunk);
    std::vector<const std::vector<dsl::Token>*> batch;
    for (size_t i = begin; i < end; ++i) batch.push_back(&tokens[i]);
    const Eigen::MatrixXd mu = embedding::encode_batch(params, batch).mu;
    for (size_t i = begin; i < end; ++i) {
      const auto& rec = split.records[i];
      char id[17];
      std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(rec.id));
      out << id << ',' << quoted(rec.text);
      for (int k = 0; k < d; ++k) out << ',' << mu(k, static_cast<Eigen::Index>(i - begin));
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace progsynth::harness
