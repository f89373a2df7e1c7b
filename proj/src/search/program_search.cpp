// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/search/program_search.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"
#include "progsynth/embedding/network.hpp"

namespace progsynth::search {

namespace {

struct RewardCache {
  std::mutex mu;
  std::unordered_map<std::string, double> scores;
};

}  // namespace

BatchEvaluator decoder_evaluator(const embedding::Params& params, ProgramReward reward, int workers) {
  auto cache = std::make_shared<RewardCache>();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int nthreads = workers > 0 ? workers : static_cast<int>(hw);
  return [&params, reward = std::move(reward), cache, nthreads](const Eigen::MatrixXd& z) {
    const Eigen::Index n = z.cols();
    std::vector<Candidate> out(static_cast<size_t>(n));
    auto work = [&](Eigen::Index begin, Eigen::Index end) {
      if (begin >= end) return;
      const auto decoded = embedding::decode_batch(params, z.middleCols(begin, end - begin),
                                                   embedding::DecodeMode::kGreedy);
      for (Eigen::Index j = begin; j < end; ++j) {
        Candidate& c = out[static_cast<size_t>(j)];
        c.program = dsl::detokenize(decoded[static_cast<size_t>(j - begin)].tokens);
        {
          std::lock_guard<std::mutex> lock(cache->mu);
          if (auto it = cache->scores.find(c.program); it != cache->scores.end()) {
            c.reward = it->second;
            continue;
          }
        }
        c.reward = reward(dsl::parse(decoded[static_cast<size_t>(j - begin)].tokens));
        std::lock_guard<std::mutex> lock(cache->mu);
        cache->scores.emplace(c.program, c.reward);
      }
    };
    const int t = static_cast<int>(std::min<Eigen::Index>(nthreads, n));
    if (t <= 1) {
      work(0, n);
      return out;
    }
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (n + t - 1) / t;
    for (int i = 0; i < t; ++i) pool.emplace_back(work, i * chunk, std::min(n, (i + 1) * chunk));
    for (std::thread& th : pool) th.join();
    return out;
  };
}

std::vector<GridState> reconstruction_states(uint64_t seed, int n, const datagen::WorldSamplerConfig& world) {
  Rng rng(derive_seed(seed, 0x5747));
  std::vector<GridState> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(datagen::sample_world(world, rng));
  return out;
}

ProgramReward reconstruction_reward(dsl::Program target, std::vector<GridState> states, int exec_cap) {
  if (states.empty()) throw std::invalid_argument("reconstruction reward needs at least one state");
  return [target = std::move(target), states = std::move(states), exec_cap](const dsl::Program& p) {
    return dsl::r_mat(p, target, states, exec_cap) + 0.1;
  };
}

std::vector<TaskInstance> task_instances(const TaskSpec& spec, int n, uint64_t base_seed) {
  std::vector<TaskInstance> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_task(spec, config_seed(base_seed, i)));
  return out;
}

double mean_return(const dsl::Program& program, const std::vector<TaskInstance>& instances) {
  if (instances.empty()) throw std::invalid_argument("no task instances");
  double total = 0.0;
  for (const TaskInstance& inst : instances) {
    total += task_reward(inst, dsl::execute(program, inst.initial, inst.spec.horizon));
  }
  return total / static_cast<double>(instances.size());
}

ProgramReward task_return(std::vector<TaskInstance> instances) {
  if (instances.empty()) throw std::invalid_argument("no task instances");
  return [instances = std::move(instances)](const dsl::Program& p) { return mean_return(p, instances); };
}

}  // namespace progsynth::search
