// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: dataset generation, training, the search
// experiments and the debugging server. Every subcommand writes into its
// --out directory only and finishes with a manifest.json.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "progsynth/datagen.hpp"
#include "progsynth/dsl/parser.hpp"
#include "progsynth/embedding/model.hpp"
#include "progsynth/embedding/trainer.hpp"
#include "progsynth/harness/api.hpp"
#include "progsynth/harness/experiments.hpp"
#include "progsynth/rng.hpp"
#include "progsynth/search/cem.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace progsynth;

namespace {

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

enum class Kind { kString, kValue, kList, kValueList };

struct Flag {
  std::string key;
  Kind kind;
  std::string raw;
  CLI::Option* opt = nullptr;
};

json parse_value(const std::string& s) {
  json v = json::parse(s, nullptr, false);
  return v.is_discarded() ? json(s) : v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

/// Options shared by every subcommand plus its named overrides.
struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::string config;
  std::string out;
  uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::vector<std::string> sets;
  std::map<std::string, Flag> flags;  // node-stable storage for CLI11

  Command(CLI::App& root, std::string n, const std::string& help) : name(std::move(n)) {
    app = root.add_subcommand(name, help);
    app->add_option("--config", config, "JSON configuration file");
    app->add_option("--out", out, "Output directory (default runs/" + name + ")");
    seed_opt = app->add_option("--seed", seed, "Random seed");
    app->add_option("--set", sets, "Override any key: key=value, nested keys with '.'");
  }

  void flag(const std::string& option, const std::string& key, Kind kind, const std::string& help) {
    Flag& f = flags[option];
    f.key = key;
    f.kind = kind;
    f.opt = app->add_option("--" + option, f.raw, help);
  }

  fs::path out_dir() const { return out.empty() ? fs::path("runs") / name : fs::path(out); }

  /// Config file, then named flags, then --set, then --seed.
  json merged() const {
    json j = json::object();
    if (!config.empty()) {
      j = json::parse(read_file(config), nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw UsageError(config + ": expected a JSON object");
    }
    for (const auto& [option, f] : flags) {
      if (f.opt->count() == 0) continue;
      switch (f.kind) {
        case Kind::kString: j[f.key] = f.raw; break;
        case Kind::kValue: j[f.key] = parse_value(f.raw); break;
        case Kind::kList: j[f.key] = split_commas(f.raw); break;
        case Kind::kValueList: {
          json arr = json::array();
          for (const std::string& s : split_commas(f.raw)) arr.push_back(parse_value(s));
          j[f.key] = arr;
          break;
        }
      }
    }
    for (const std::string& s : sets) {
      const size_t eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
      std::string ptr = "/" + s.substr(0, eq);
      for (char& c : ptr)
        if (c == '.') c = '/';
      j[json::json_pointer(ptr)] = parse_value(s.substr(eq + 1));
    }
    if (seed_opt->count() > 0) j["seed"] = seed;
    return j;
  }
};

void reject_unknown(const json& j, const json& known, const std::set<std::string>& extra, const std::string& what) {
  for (const auto& [k, v] : j.items())
    if (!known.contains(k) && !extra.count(k)) throw UsageError("unknown " + what + " key '" + k + "'");
}

/// Collects outputs and writes the run manifest.
class Run {
 public:
  Run(const Command& cmd, json config) : dir_(cmd.out_dir()), command_(cmd.name), config_(std::move(config)) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& rel, const std::string& content) {
    const fs::path p = dir_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
    outputs_[rel] = hex64(fnv1a(content));
  }

  /// Records a file some library call already wrote.
  void record(const std::string& rel) { outputs_[rel] = hex64(fnv1a(read_file(dir_ / rel))); }

  void checkpoint(const fs::path& path, const embedding::Params& params) {
    checkpoint_ = {{"path", path.string()}, {"params_hash", hex64(embedding::params_hash(params))}};
  }

  void finish(const json& extra = json::object()) {
    json m = {{"command", command_},
              {"version", kVersion},
              {"config", config_},
              {"seed", config_.value("seed", uint64_t{0})},
              {"outputs", outputs_}};
    if (!checkpoint_.is_null()) m["checkpoint"] = checkpoint_;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream(dir_ / "manifest.json") << m.dump(2) << '\n';
    std::cerr << "wrote " << (dir_ / "manifest.json").string() << '\n';
  }

 private:
  fs::path dir_;
  std::string command_;
  json config_;
  json checkpoint_;
  std::map<std::string, std::string> outputs_;
};

std::string splits_csv(const datagen::Dataset& ds) {
  std::ostringstream os;
  os << "split,programs,mean_tokens,max_tokens\n";
  for (const datagen::Split* s : {&ds.train, &ds.val, &ds.test}) {
    size_t total = 0, longest = 0;
    for (const auto& r : s->records) {
      const size_t n = dsl::to_tokens(r.program).size();
      total += n;
      longest = std::max(longest, n);
    }
    const double mean = s->records.empty() ? 0.0 : static_cast<double>(total) / s->records.size();
    os << s->name << ',' << s->records.size() << ',' << mean << ',' << longest << '\n';
  }
  return os.str();
}

datagen::GenConfig gen_config(const json& j) {
  json known;
  datagen::to_json(known, datagen::GenConfig{});
  reject_unknown(j, known, {"seed", "workers"}, "gen-data");
  datagen::GenConfig cfg;
  datagen::from_json(j, cfg);
  if (const std::string err = cfg.validate(); !err.empty()) throw UsageError(err);
  return cfg;
}

void cmd_gen_data(const Command& cmd) {
  json j = cmd.merged();
  const datagen::GenConfig cfg = gen_config(j);
  const uint64_t seed = j.value("seed", uint64_t{0});
  json resolved;
  datagen::to_json(resolved, cfg);
  resolved["seed"] = seed;
  Run run(cmd, resolved);
  const datagen::Dataset ds = datagen::build_dataset(cfg, seed);
  datagen::save_dataset(ds, run.dir() / "dataset");
  for (const char* s : {"train", "val", "test"}) {
    run.record(std::string("dataset/") + s + ".programs.txt");
    run.record(std::string("dataset/") + s + ".rollouts.bin");
  }
  run.record("dataset/manifest.json");
  run.write("splits.csv", splits_csv(ds));
  run.finish({{"candidates", ds.candidates}});
}

void cmd_train(const Command& cmd) {
  json j = cmd.merged();
  json known;
  embedding::to_json(known, embedding::TrainConfig{});
  reject_unknown(j, known, {"seed", "preset", "dataset", "data"}, "train");
  const uint64_t seed = j.value("seed", uint64_t{0});
  json tj = j;
  for (const char* k : {"seed", "dataset", "data"}) tj.erase(k);
  embedding::TrainConfig cfg;
  embedding::from_json(tj, cfg);
  if (const std::string err = cfg.validate(); !err.empty()) throw UsageError(err);

  json resolved;
  embedding::to_json(resolved, cfg);
  resolved["seed"] = seed;
  resolved["dataset"] = j.value("dataset", std::string());
  Run run(cmd, resolved);

  datagen::Dataset ds;
  if (!resolved["dataset"].get<std::string>().empty()) {
    ds = datagen::load_dataset(resolved["dataset"].get<std::string>());
  } else {
    const datagen::GenConfig gc = gen_config(j.value("data", json::object()));
    std::cerr << "building dataset (" << gc.total() << " programs)\n";
    ds = datagen::build_dataset(gc, derive_seed(seed, 0xda7a));
    datagen::save_dataset(ds, run.dir() / "dataset");
    run.record("dataset/manifest.json");
  }
  std::cerr << embedding::log_header() << '\n';
  const embedding::TrainResult res =
      embedding::train(cfg, ds, seed, run.dir(), [](const embedding::LogRow& row) {
        std::cerr << embedding::log_line(row) << '\n';
      });
  for (const char* f : {"metrics.csv", "best.ckpt", "last.ckpt"}) run.record(f);
  run.checkpoint(run.dir() / "best.ckpt", res.best);
  run.finish({{"best_round", res.best_round},
              {"best_phase", res.best_phase},
              {"best_token_acc", res.best_metrics.token_acc},
              {"best_valid_rate", res.best_metrics.valid_rate}});
}

harness::ExperimentConfig experiment_config(const json& j) {
  try {
    auto cfg = j.get<harness::ExperimentConfig>();
    if (const std::string err = cfg.validate(); !err.empty()) throw UsageError(err);
    return cfg;
  } catch (const json::exception& e) {
    throw UsageError(e.what());
  } catch (const harness::ExperimentError& e) {
    throw UsageError(e.what());
  }
}

json resolved(const harness::ExperimentConfig& cfg) {
  json j;
  harness::to_json(j, cfg);
  return j;
}

embedding::Params load_params(const harness::ExperimentConfig& cfg, Run& run) {
  if (cfg.checkpoint.empty()) throw UsageError("--checkpoint is required");
  embedding::Params p = embedding::load_checkpoint(cfg.checkpoint);
  run.checkpoint(cfg.checkpoint, p);
  return p;
}

void write_experiment(Run& run, const harness::ExperimentResult& res) {
  run.write("results.csv", res.table.entries_csv());
  run.write("summary.csv", res.table.summary_csv());
  run.write("results.json", json(res.table).dump(2) + "\n");
  for (const harness::NamedLog& log : res.logs) {
    std::string csv = search::search_log_header() + "\n";
    for (const search::IterationLog& row : log.result.log) csv += search::search_log_line(row) + "\n";
    run.write("logs/" + log.name + ".csv", csv);
    run.write("trajectories/" + log.name + ".csv", search::trajectory_csv(log.result));
  }
  std::cerr << res.table.summary_csv();
}

void cmd_reconstruct(const Command& cmd) {
  const harness::ExperimentConfig cfg = experiment_config(cmd.merged());
  Run run(cmd, resolved(cfg));
  const embedding::Params params = load_params(cfg, run);
  write_experiment(run, harness::run_reconstruct(params, cfg));
  run.finish();
}

void cmd_solve(const Command& cmd) {
  const harness::ExperimentConfig cfg = experiment_config(cmd.merged());
  Run run(cmd, resolved(cfg));
  std::optional<embedding::Params> params;
  if (cfg.method != "ground-truth") params = load_params(cfg, run);
  write_experiment(run, harness::run_solve(params ? &*params : nullptr, cfg));
  run.finish();
}

void cmd_generalize(const Command& cmd) {
  const harness::ExperimentConfig cfg = experiment_config(cmd.merged());
  Run run(cmd, resolved(cfg));
  const harness::GeneralizeResult res = harness::run_generalize(cfg);
  run.write("generalize.csv", res.csv());
  std::cerr << res.csv();
  run.finish();
}

void cmd_unseen(const Command& cmd) {
  const harness::ExperimentConfig cfg = experiment_config(cmd.merged());
  Run run(cmd, resolved(cfg));
  const embedding::Params params = load_params(cfg, run);
  const harness::UnseenResult res = harness::run_unseen_config(params, cfg);
  run.write("unseen.csv", res.csv());
  run.write("summary.csv", res.summary_csv());
  std::cerr << res.summary_csv();
  run.finish();
}

void cmd_interpolate(const Command& cmd) {
  const harness::ExperimentConfig cfg = experiment_config(cmd.merged());
  if (cfg.program_a.empty() || cfg.program_b.empty()) throw UsageError("--a and --b are required");
  Run run(cmd, resolved(cfg));
  const embedding::Params params = load_params(cfg, run);
  const std::string csv = harness::interpolation_csv(harness::run_interpolate(params, cfg.program_a, cfg.program_b,
                                                                              cfg.steps));
  run.write("interpolation.csv", csv);
  std::cerr << csv;
  run.finish();
}

void cmd_export(const Command& cmd) {
  const harness::ExperimentConfig cfg = experiment_config(cmd.merged());
  if (cfg.dataset.empty()) throw UsageError("--dataset is required");
  Run run(cmd, resolved(cfg));
  const embedding::Params params = load_params(cfg, run);
  const datagen::Dataset ds = datagen::load_dataset(cfg.dataset);
  run.write("latents.csv", harness::export_latents(params, ds.split(cfg.split)));
  run.finish({{"dataset", cfg.dataset.string()}, {"split", cfg.split}});
}

void cmd_serve(const Command& cmd) {
  json j = cmd.merged();
  reject_unknown(j, json::object(), {"seed", "checkpoint", "host", "port", "eval_configs", "max_grid"}, "serve");
  const std::string host = j.value("host", std::string("127.0.0.1"));
  const int port = j.value("port", 8080);
  harness::ApiOptions opt;
  opt.eval_configs = j.value("eval_configs", opt.eval_configs);
  opt.max_grid = j.value("max_grid", opt.max_grid);
  std::optional<embedding::Params> params;
  if (const std::string ckpt = j.value("checkpoint", std::string()); !ckpt.empty())
    params = embedding::load_checkpoint(ckpt);
  harness::ApiService service(std::move(params), opt);
  harness::ApiServer server(service);
  const int bound = server.bind(host, port);
  std::cout << "listening on http://" << host << ':' << bound << std::endl;
  server.listen();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent program search for the Karel domain"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Command gen(app, "gen-data", "Sample a program dataset with covering rollouts");
  gen.flag("train-size", "train_size", Kind::kValue, "Training programs");
  gen.flag("val-size", "val_size", Kind::kValue, "Validation programs");
  gen.flag("test-size", "test_size", Kind::kValue, "Test programs");
  gen.flag("workers", "workers", Kind::kValue, "Worker threads (0 = all cores)");

  Command train(app, "train", "Train the program embedding");
  train.flag("dataset", "dataset", Kind::kString, "Dataset directory (default: generate one)");
  train.flag("preset", "preset", Kind::kString, "desk or full");
  train.flag("rounds", "rounds", Kind::kValue, "Alternation rounds");
  train.flag("batch-size", "batch_size", Kind::kValue, "Minibatch size");

  Command rec(app, "reconstruct", "Search the latent space for reference programs");
  Command solve(app, "solve", "Search the latent space for task policies");
  Command generalize(app, "generalize", "Re-score programs on large grids");
  Command unseen(app, "unseen-config", "Search on a fraction of configurations, score on all");
  Command interp(app, "interpolate", "Decode points between two program embeddings");
  Command export_cmd(app, "export-latents", "Write posterior means of a dataset split");
  for (Command* c : {&rec, &solve, &unseen, &interp, &export_cmd})
    c->flag("checkpoint", "checkpoint", Kind::kString, "Trained checkpoint");
  for (Command* c : {&rec, &solve, &unseen}) {
    c->flag("method", "method", Kind::kString, "cem, rand-8, rand-64 or ground-truth");
    c->flag("seeds", "seeds", Kind::kValue, "Repetitions per target");
    c->flag("n-configs", "n_configs", Kind::kValue, "States or configurations per evaluation");
    c->flag("workers", "workers", Kind::kValue, "Parallel searches (0 = all cores)");
  }
  rec.flag("targets", "targets", Kind::kList, "Comma-separated reference names");
  solve.flag("targets", "targets", Kind::kList, "Comma-separated task names");
  generalize.flag("results", "results", Kind::kString, "results.json from a solve run");
  generalize.flag("targets", "targets", Kind::kList, "Comma-separated task names");
  generalize.flag("large-grid", "large_grid", Kind::kValue, "Side length of the large grids");
  generalize.flag("n-configs", "n_configs", Kind::kValue, "Configurations per grid size");
  unseen.flag("task", "task", Kind::kString, "TopOff or Harvester");
  unseen.flag("fractions", "fractions", Kind::kValueList, "Comma-separated pool fractions");
  unseen.flag("pool-size", "pool_size", Kind::kValue, "Harvester pool size");
  interp.flag("a", "program_a", Kind::kString, "First program");
  interp.flag("b", "program_b", Kind::kString, "Second program");
  interp.flag("steps", "steps", Kind::kValue, "Decoded points, endpoints included");
  export_cmd.flag("dataset", "dataset", Kind::kString, "Dataset directory");
  export_cmd.flag("split", "split", Kind::kString, "train, val or test");

  Command serve(app, "serve", "Serve the debugging HTTP API");
  serve.flag("checkpoint", "checkpoint", Kind::kString, "Checkpoint enabling /decode");
  serve.flag("host", "host", Kind::kString, "Bind address");
  serve.flag("port", "port", Kind::kValue, "Port (0 picks a free one)");
  serve.flag("eval-configs", "eval_configs", Kind::kValue, "Configurations averaged per reward");

  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<Command*, void (*)(const Command&)>> table = {
      {&gen, cmd_gen_data},     {&train, cmd_train},   {&rec, cmd_reconstruct},
      {&solve, cmd_solve},      {&generalize, cmd_generalize}, {&unseen, cmd_unseen},
      {&interp, cmd_interpolate}, {&export_cmd, cmd_export}, {&serve, cmd_serve}};
  try {
    for (const auto& [c, fn] : table)
      if (c->app->parsed()) fn(*c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
