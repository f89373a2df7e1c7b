// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/embedding/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"

namespace progsynth::embedding {

namespace {

void weights_to_json(nlohmann::json& j, const LossWeights& w) {
  j = {{"program", w.program}, {"behavior", w.behavior}, {"latent", w.latent}};
}

LossWeights weights_from_json(const nlohmann::json& j, LossWeights w) {
  w.program = j.value("program", w.program);
  w.behavior = j.value("behavior", w.behavior);
  w.latent = j.value("latent", w.latent);
  return w;
}

std::vector<GridState> initial_states(const datagen::DatasetRecord& r) {
  std::vector<GridState> out;
  for (const Rollout& x : r.rollouts) out.push_back(x.initial_state);
  return out;
}

constexpr int kEvalBatch = 256;

LogRow new_row(int round, std::string phase) {
  LogRow row;
  row.round = round;
  row.phase = std::move(phase);
  return row;
}

}  // namespace

TrainConfig TrainConfig::desk() { return TrainConfig{}; }

TrainConfig TrainConfig::full() {
  TrainConfig cfg;
  cfg.dims = {256, 256, 256, 256};
  cfg.batch_size = 256;
  return cfg;
}

TrainConfig TrainConfig::preset(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "full") return full();
  throw std::invalid_argument("unknown training preset '" + name + "'");
}

std::string TrainConfig::validate() const {
  if (beta < 0) return "beta must be >= 0";
  for (const LossWeights* w : {&supervised, &behavior}) {
    if (w->program < 0 || w->behavior < 0 || w->latent < 0) return "loss weights must be >= 0";
  }
  if (supervised_lr <= 0 || rl_lr <= 0) return "learning rates must be positive";
  if (batch_size <= 0) return "batch_size must be positive";
  if (rounds < 0) return "rounds must be >= 0";
  if (baseline_decay < 0 || baseline_decay >= 1) return "baseline_decay must be in [0, 1)";
  if (grad_clip < 0) return "grad_clip must be >= 0";
  if (dims.embed <= 0 || dims.hidden <= 0 || dims.latent <= 0 || dims.policy_hidden <= 0) {
    return "model dimensions must be positive";
  }
  return {};
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  nlohmann::json sup, beh;
  weights_to_json(sup, c.supervised);
  weights_to_json(beh, c.behavior);
  j = {{"dims", c.dims},
       {"beta", c.beta},
       {"supervised_lr", c.supervised_lr},
       {"rl_lr", c.rl_lr},
       {"batch_size", c.batch_size},
       {"rounds", c.rounds},
       {"supervised_weights", sup},
       {"behavior_weights", beh},
       {"baseline_decay", c.baseline_decay},
       {"grad_clip", c.grad_clip},
       {"exec_cap", c.exec_cap},
       {"eval_programs", c.eval_programs},
       {"eval_smoothness", c.eval_smoothness}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (j.contains("preset")) c = TrainConfig::preset(j.at("preset").get<std::string>());
  if (j.contains("dims")) c.dims = j.at("dims").get<ModelDims>();
  c.beta = j.value("beta", c.beta);
  c.supervised_lr = j.value("supervised_lr", c.supervised_lr);
  c.rl_lr = j.value("rl_lr", c.rl_lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.rounds = j.value("rounds", c.rounds);
  if (j.contains("supervised_weights")) c.supervised = weights_from_json(j.at("supervised_weights"), c.supervised);
  if (j.contains("behavior_weights")) c.behavior = weights_from_json(j.at("behavior_weights"), c.behavior);
  c.baseline_decay = j.value("baseline_decay", c.baseline_decay);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.exec_cap = j.value("exec_cap", c.exec_cap);
  c.eval_programs = j.value("eval_programs", c.eval_programs);
  c.eval_smoothness = j.value("eval_smoothness", c.eval_smoothness);
}

Adam::Adam(const ModelDims& dims, double beta1, double beta2, double eps)
    : m_(Params::zeros(dims)), v_(Params::zeros(dims)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Params& params, const Params& grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::vector<const MatrixXd*> g;
  std::vector<MatrixXd*> m;
  std::vector<MatrixXd*> v;
  grad.visit([&](const std::string&, const MatrixXd& x) { g.push_back(&x); });
  m_.visit([&](const std::string&, MatrixXd& x) { m.push_back(&x); });
  v_.visit([&](const std::string&, MatrixXd& x) { v.push_back(&x); });
  size_t i = 0;
  params.visit([&](const std::string&, MatrixXd& p) {
    *m[i] = beta1_ * *m[i] + (1.0 - beta1_) * *g[i];
    *v[i] = beta2_ * *v[i] + (1.0 - beta2_) * g[i]->cwiseAbs2();
    p.array() -= lr * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + eps_);
    ++i;
  });
}

PreparedSplit::PreparedSplit(const datagen::Split& split, int limit) : split_(&split) {
  size_t n = split.records.size();
  if (limit > 0) n = std::min(n, static_cast<size_t>(limit));
  tokens_.reserve(n);
  masks_.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    tokens_.push_back(dsl::to_tokens(split.records[i].program));
    masks_.push_back(teacher_masks(tokens_.back()));
  }
}

Example PreparedSplit::example(size_t i) const {
  return {&tokens_[i], &masks_[i], &split_->records[i].rollouts, &split_->records[i].program};
}

std::vector<Example> PreparedSplit::examples(const std::vector<size_t>& indices) const {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (size_t i : indices) out.push_back(example(i));
  return out;
}

EvalMetrics eval_metrics(const Params& params, const datagen::Split& split, const EvalOptions& opt) {
  const PreparedSplit prep(split, opt.max_programs);
  EvalMetrics m;
  const size_t n = prep.size();
  if (n == 0) return m;
  long tokens = 0, tokens_ok = 0, steps = 0, steps_ok = 0, rolls = 0, rolls_ok = 0;
  size_t exact = 0, valid = 0;
  double rmat = 0.0, lp = 0.0, ll = 0.0;
  for (size_t start = 0; start < n; start += kEvalBatch) {
    std::vector<size_t> idx(std::min<size_t>(kEvalBatch, n - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto batch = prep.examples(idx);
    const MatrixXd eps = MatrixXd::Zero(params.dims.latent, static_cast<Eigen::Index>(idx.size()));
    const LossReport rep = compute_loss(params, batch, {1.0, 0.0, 1.0}, {}, eps, nullptr, nullptr);
    tokens += rep.tokens;
    tokens_ok += rep.tokens_correct;
    steps += rep.action_steps;
    steps_ok += rep.actions_correct;
    rolls += rep.rollouts;
    rolls_ok += rep.rollouts_exact;
    lp += rep.program * static_cast<double>(idx.size());
    ll += rep.latent * static_cast<double>(idx.size());

    std::vector<const std::vector<dsl::Token>*> progs;
    for (const Example& e : batch) progs.push_back(e.tokens);
    const Encoding enc = encode_batch(params, progs);
    const auto decoded = decode_batch(params, enc.mu, DecodeMode::kGreedy);
    for (size_t k = 0; k < idx.size(); ++k) {
      if (decoded[k].tokens == *batch[k].tokens) ++exact;
      try {
        const dsl::Program cand = dsl::parse(decoded[k].tokens);
        ++valid;
        const auto inits = initial_states(prep.record(idx[k]));
        rmat += dsl::r_mat(cand, *batch[k].program, inits, opt.exec_cap);
      } catch (const dsl::ParseError&) {
      }
    }
  }
  const double nd = static_cast<double>(n);
  m.token_acc = steps > 0 ? static_cast<double>(steps_ok) / static_cast<double>(steps) : 1.0;
  m.seq_acc = rolls > 0 ? static_cast<double>(rolls_ok) / static_cast<double>(rolls) : 1.0;
  m.program_token_acc = tokens > 0 ? static_cast<double>(tokens_ok) / static_cast<double>(tokens) : 1.0;
  m.exact_rate = static_cast<double>(exact) / nd;
  m.valid_rate = static_cast<double>(valid) / nd;
  m.val_r_mat = rmat / nd;
  m.loss_program = lp / nd;
  m.loss_latent = ll / nd;
  if (opt.smoothness) m.smoothness = latent_smoothness(params, split, opt.neighbors, opt.exec_cap, opt.max_programs);
  return m;
}

double latent_smoothness(const Params& params, const datagen::Split& split, int neighbors, int exec_cap,
                         int max_programs) {
  const PreparedSplit prep(split, max_programs);
  const size_t n = prep.size();
  if (n < 2) return 0.0;
  MatrixXd mu(params.dims.latent, static_cast<Eigen::Index>(n));
  std::vector<dsl::Program> decoded;
  decoded.reserve(n);
  for (size_t start = 0; start < n; start += kEvalBatch) {
    std::vector<const std::vector<dsl::Token>*> progs;
    for (size_t i = start; i < std::min(n, start + kEvalBatch); ++i) progs.push_back(prep.example(i).tokens);
    const Encoding enc = encode_batch(params, progs);
    mu.middleCols(static_cast<Eigen::Index>(start), enc.mu.cols()) = enc.mu;
    for (const Decoded& d : decode_batch(params, enc.mu, DecodeMode::kGreedy)) decoded.push_back(dsl::parse(d.tokens));
  }
  const int k = std::min<int>(neighbors, static_cast<int>(n) - 1);
  double total = 0.0;
  std::vector<std::pair<double, size_t>> dist(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) dist[j] = {(mu.col(j) - mu.col(i)).squaredNorm(), j};
    dist[i].first = std::numeric_limits<double>::infinity();
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    const GridState init = prep.record(i).rollouts.front().initial_state;
    double acc = 0.0;
    for (int q = 0; q < k; ++q) {
      acc += dsl::r_mat(decoded[dist[q].second], prep.record(i).program, std::span(&init, 1), exec_cap);
    }
    total += acc / k;
  }
  return total / static_cast<double>(n);
}

Trainer::Trainer(const TrainConfig& cfg, uint64_t seed) : Trainer(cfg, [&] {
  Rng init_rng(derive_seed(seed, 1));
  return Params::init(cfg.dims, init_rng);
}(), seed) {}

Trainer::Trainer(const TrainConfig& cfg, Params init, uint64_t seed)
    : cfg_(cfg),
      params_(std::move(init)),
      supervised_(cfg.dims),
      behavior_(cfg.dims),
      rng_(derive_seed(seed, 2)) {
  if (const std::string err = cfg.validate(); !err.empty()) throw std::invalid_argument(err);
}

LossReport Trainer::step(const std::vector<Example>& batch, const LossWeights& weights, Phase phase) {
  const MatrixXd eps = sample_noise(cfg_.dims.latent, static_cast<Eigen::Index>(batch.size()), rng_);
  LossOptions opt;
  opt.beta = cfg_.beta;
  opt.exec_cap = cfg_.exec_cap;
  std::vector<Decoded> samples;
  if (weights.behavior != 0.0) {
    // The baseline is centred before the update so the first batch is unbiased.
    const Encoding enc = [&] {
      std::vector<const std::vector<dsl::Token>*> progs;
      for (const Example& e : batch) progs.push_back(e.tokens);
      return encode_batch(params_, progs);
    }();
    samples = decode_batch(params_, reparameterize(enc, eps), DecodeMode::kSample, &rng_);
    opt.behavior_samples = &samples;
    if (!baseline_ready_) {
      double sum = 0.0;
      for (size_t j = 0; j < batch.size(); ++j) {
        std::vector<GridState> inits;
        for (const Rollout& r : *batch[j].rollouts) inits.push_back(r.initial_state);
        sum += dsl::r_mat(dsl::parse(samples[j].tokens), *batch[j].program, inits, cfg_.exec_cap);
      }
      baseline_ = sum / static_cast<double>(batch.size());
      baseline_ready_ = true;
    }
    opt.baseline = baseline_;
  }
  Params grad = Params::zeros(cfg_.dims);
  LossReport rep = compute_loss(params_, batch, weights, opt, eps, nullptr, &grad);
  if (!std::isfinite(rep.total) || !grad.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite loss or gradient (total " << rep.total << ", nll " << rep.nll << ", kl " << rep.kl
        << ", latent " << rep.latent << ", behavior " << rep.behavior << ")";
    throw TrainingError(msg.str());
  }
  if (cfg_.grad_clip > 0.0) {
    const double norm = std::sqrt(grad.squared_norm());
    if (norm > cfg_.grad_clip) grad.add_scaled(grad, cfg_.grad_clip / norm - 1.0);
  }
  if (phase == Phase::kSupervised) {
    supervised_.step(params_, grad, cfg_.supervised_lr);
  } else {
    behavior_.step(params_, grad, cfg_.rl_lr);
  }
  if (!rep.rewards.empty()) {
    const double mean = std::accumulate(rep.rewards.begin(), rep.rewards.end(), 0.0) / rep.rewards.size();
    baseline_ = cfg_.baseline_decay * baseline_ + (1.0 - cfg_.baseline_decay) * mean;
  }
  return rep;
}

std::string log_header() {
  return "round,phase,updates,loss_program,loss_latent,loss_behavior,mean_reward,baseline,token_acc,seq_acc,"
         "program_token_acc,exact_rate,valid_rate,val_r_mat,val_loss_program,val_loss_latent,smoothness,seconds";
}

std::string log_line(const LogRow& r) {
  std::ostringstream out;
  out << std::setprecision(6) << r.round << ',' << r.phase << ',' << r.updates << ',' << r.loss_program << ','
      << r.loss_latent << ',' << r.loss_behavior << ',' << r.mean_reward << ',' << r.baseline << ','
      << r.val.token_acc << ',' << r.val.seq_acc << ',' << r.val.program_token_acc << ',' << r.val.exact_rate << ','
      << r.val.valid_rate << ',' << r.val.val_r_mat << ',' << r.val.loss_program << ',' << r.val.loss_latent << ','
      << (std::isnan(r.val.smoothness) ? std::string() : std::to_string(r.val.smoothness)) << ',' << std::fixed
      << std::setprecision(1) << r.seconds;
  return out.str();
}

TrainResult train(const TrainConfig& cfg, const datagen::Dataset& ds, uint64_t seed,
                  const std::filesystem::path& out_dir, const std::function<void(const LogRow&)>& on_row) {
  if (const std::string err = cfg.validate(); !err.empty()) throw std::invalid_argument(err);
  if (ds.train.records.empty()) throw std::invalid_argument("training split is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedSplit train_split(ds.train);
  Trainer trainer(cfg, seed);
  Rng order_rng(derive_seed(seed, 3));
  EvalOptions eval_opt;
  eval_opt.max_programs = cfg.eval_programs;
  eval_opt.smoothness = cfg.eval_smoothness;
  eval_opt.exec_cap = cfg.exec_cap;

  std::ofstream csv;
  nlohmann::json meta = {{"train_config", cfg}, {"seed", seed}, {"dataset_seed", ds.seed}};
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(out_dir / "metrics.csv");
    csv << log_header() << '\n';
  }

  TrainResult result;
  double best_score = -1.0;
  auto record = [&](LogRow row) {
    row.val = eval_metrics(trainer.params(), ds.val, eval_opt);
    row.baseline = trainer.baseline();
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (csv.is_open()) csv << log_line(row) << '\n' << std::flush;
    if (on_row) on_row(row);
    if (row.val.token_acc > best_score) {
      best_score = row.val.token_acc;
      result.best = trainer.params();
      result.best_metrics = row.val;
      result.best_round = row.round;
      result.best_phase = row.phase;
      if (!out_dir.empty()) {
        nlohmann::json m = meta;
        m["round"] = row.round;
        m["phase"] = row.phase;
        m["val_token_acc"] = row.val.token_acc;
        save_checkpoint(trainer.params(), m, out_dir / "best.ckpt");
      }
    }
    result.log.push_back(std::move(row));
  };

  record(new_row(0, "init"));
  const size_t n = train_split.size();
  const size_t bs = static_cast<size_t>(cfg.batch_size);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int round = 1; round <= cfg.rounds; ++round) {
    std::shuffle(order.begin(), order.end(), order_rng);
    LogRow sup = new_row(round, "supervised");
    for (size_t start = 0; start < n; start += bs) {
      const std::vector<size_t> idx(order.begin() + start, order.begin() + std::min(n, start + bs));
      const LossReport rep = trainer.step(train_split.examples(idx), cfg.supervised, Trainer::Phase::kSupervised);
      sup.loss_program += rep.program;
      sup.loss_latent += rep.latent;
      ++sup.updates;
    }
    sup.loss_program /= sup.updates;
    sup.loss_latent /= sup.updates;
    record(sup);

    const LossWeights& bw = cfg.behavior;
    if (bw.program == 0.0 && bw.behavior == 0.0 && bw.latent == 0.0) continue;
    LogRow beh = new_row(round, "behavior");
    std::shuffle(order.begin(), order.end(), order_rng);
    for (size_t start = 0; start < n; start += bs) {
      const std::vector<size_t> idx(order.begin() + start, order.begin() + std::min(n, start + bs));
      const LossReport rep = trainer.step(train_split.examples(idx), bw, Trainer::Phase::kBehavior);
      beh.loss_program += rep.program;
      beh.loss_latent += rep.latent;
      beh.loss_behavior += rep.behavior;
      if (!rep.rewards.empty()) {
        beh.mean_reward += std::accumulate(rep.rewards.begin(), rep.rewards.end(), 0.0) / rep.rewards.size();
      }
      ++beh.updates;
    }
    beh.loss_program /= beh.updates;
    beh.loss_latent /= beh.updates;
    beh.loss_behavior /= beh.updates;
    beh.mean_reward /= beh.updates;
    record(beh);
  }
  result.last = trainer.params();
  if (!out_dir.empty()) {
    nlohmann::json m = meta;
    m["round"] = cfg.rounds;
    m["phase"] = "last";
    save_checkpoint(result.last, m, out_dir / "last.ckpt");
  }
  return result;
}

}  // namespace progsynth::embedding
