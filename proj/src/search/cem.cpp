// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/search/cem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "progsynth/rng.hpp"

namespace progsynth::search {

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  }
  return m;
}

std::string csv_field(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string init_name(InitDistribution d) {
  switch (d) {
    case InitDistribution::kOnes: return "ones";
    case InitDistribution::kStandard: return "standard";
    case InitDistribution::kNarrow: return "narrow";
  }
  return "narrow";
}

InitDistribution init_from_name(const std::string& name) {
  if (name == "ones") return InitDistribution::kOnes;
  if (name == "standard") return InitDistribution::kStandard;
  if (name == "narrow") return InitDistribution::kNarrow;
  throw std::invalid_argument("unknown init distribution '" + name + "' (ones, standard, narrow)");
}

int CemConfig::elites() const {
  return std::clamp(static_cast<int>(std::lround(population * elite_fraction)), 1, std::max(population, 1));
}

std::string CemConfig::validate() const {
  if (population < 1) return "population must be >= 1";
  if (sigma < 0) return "sigma must be >= 0";
  if (elite_fraction <= 0 || elite_fraction > 1) return "elite_fraction must be in (0, 1]";
  if (max_iters < 1) return "max_iters must be >= 1";
  if (patience < 1) return "patience must be >= 1";
  if (decay_iters < 1) return "decay_iters must be >= 1";
  return {};
}

void to_json(nlohmann::json& j, const CemConfig& c) {
  j = {{"population", c.population},  {"sigma", c.sigma},         {"elite_fraction", c.elite_fraction},
       {"exp_sigma_decay", c.exp_sigma_decay}, {"init", init_name(c.init)}, {"max_iters", c.max_iters},
       {"patience", c.patience},      {"max_reward", c.max_reward}, {"sigma_floor", c.sigma_floor},
       {"decay_iters", c.decay_iters}};
}

void from_json(const nlohmann::json& j, CemConfig& c) {
  c.population = j.value("population", c.population);
  c.sigma = j.value("sigma", c.sigma);
  c.elite_fraction = j.value("elite_fraction", c.elite_fraction);
  c.exp_sigma_decay = j.value("exp_sigma_decay", c.exp_sigma_decay);
  if (j.contains("init")) c.init = init_from_name(j.at("init").get<std::string>());
  c.max_iters = j.value("max_iters", c.max_iters);
  c.patience = j.value("patience", c.patience);
  c.max_reward = j.value("max_reward", c.max_reward);
  c.sigma_floor = j.value("sigma_floor", c.sigma_floor);
  c.decay_iters = j.value("decay_iters", c.decay_iters);
}

double sigma_at(const CemConfig& cfg, int iter) {
  if (!cfg.exp_sigma_decay || cfg.sigma <= cfg.sigma_floor) return cfg.sigma;
  const double frac = std::min(1.0, static_cast<double>(iter) / cfg.decay_iters);
  return std::max(cfg.sigma_floor, cfg.sigma * std::pow(cfg.sigma_floor / cfg.sigma, frac));
}

Eigen::VectorXd draw_init(InitDistribution d, int dim, uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1417));
  switch (d) {
    case InitDistribution::kOnes: return Eigen::VectorXd::Ones(dim);
    case InitDistribution::kStandard: return normal_matrix(dim, 1, rng).col(0);
    case InitDistribution::kNarrow: return 0.1 * normal_matrix(dim, 1, rng).col(0);
  }
  return Eigen::VectorXd::Zero(dim);
}

SearchResult cem_search(const BatchEvaluator& eval, int dim, const CemConfig& cfg, uint64_t seed) {
  if (const std::string err = cfg.validate(); !err.empty()) throw std::invalid_argument(err);
  Rng rng(derive_seed(seed, 0xce));
  SearchResult res;
  res.best_reward = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd center = draw_init(cfg.init, dim, seed);
  const int k = cfg.elites();
  int streak = 0;
  std::vector<int> idx(cfg.population);
  for (int it = 0; it < cfg.max_iters; ++it) {
    IterationLog row;
    row.iteration = it;
    row.sigma = sigma_at(cfg, it);
    row.center = center;
    const Eigen::MatrixXd z = (row.sigma * normal_matrix(dim, cfg.population, rng)).colwise() + center;
    const std::vector<Candidate> scores = eval(z);
    if (scores.size() != static_cast<size_t>(cfg.population)) throw std::logic_error("evaluator returned wrong count");

    row.best_reward = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.population; ++i) {
      row.mean_reward += scores[i].reward / cfg.population;
      row.best_reward = std::max(row.best_reward, scores[i].reward);
      if (scores[i].reward > res.best_reward) {
        res.best_reward = scores[i].reward;
        res.best_program = scores[i].program;
        res.best_latent = z.col(i);
      }
    }
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a].reward > scores[b].reward; });
    double wsum = 0.0;
    for (int e = 0; e < k; ++e) wsum += std::max(0.0, scores[idx[e]].reward);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(dim);
    for (int e = 0; e < k; ++e) {
      const double w = wsum > 0.0 ? std::max(0.0, scores[idx[e]].reward) / wsum : 1.0 / k;
      next += w * z.col(idx[e]);
    }
    center = next;

    const Candidate c = eval(center).front();
    row.center_reward = c.reward;
    row.center_program = c.program;
    if (c.reward > res.best_reward) {
      res.best_reward = c.reward;
      res.best_program = c.program;
      res.best_latent = center;
    }
    row.best_so_far = res.best_reward;
    res.log.push_back(std::move(row));
    res.iterations = it + 1;
    streak = c.reward >= cfg.max_reward - 1e-9 ? streak + 1 : 0;
    if (streak >= cfg.patience) {
      res.converged = true;
      break;
    }
  }
  res.center = center;
  return res;
}

SearchResult random_search(const BatchEvaluator& eval, int dim, int n, double sigma, InitDistribution init,
                           uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random search needs n >= 1");
  Rng rng(derive_seed(seed, 0x5e));
  const Eigen::VectorXd center = draw_init(init, dim, seed);
  const Eigen::MatrixXd z = (sigma * normal_matrix(dim, n, rng)).colwise() + center;
  const std::vector<Candidate> scores = eval(z);
  SearchResult res;
  IterationLog row;
  row.sigma = sigma;
  row.center = center;
  row.best_reward = -std::numeric_limits<double>::infinity();
  int best = 0;
  for (int i = 0; i < n; ++i) {
    row.mean_reward += scores[i].reward / n;
    if (scores[i].reward > scores[best].reward) best = i;
  }
  row.best_reward = scores[best].reward;
  row.best_so_far = row.best_reward;
  res.best_reward = scores[best].reward;
  res.best_program = scores[best].program;
  res.best_latent = z.col(best);
  res.center = center;
  res.log.push_back(row);
  res.iterations = 1;
  return res;
}

std::string search_log_header() { return "iteration,sigma,mean_reward,best_reward,best_so_far,center_reward,center_program"; }

std::string search_log_line(const IterationLog& r) {
  std::ostringstream out;
  out.precision(8);
  out << r.iteration << ',' << r.sigma << ',' << r.mean_reward << ',' << r.best_reward << ',' << r.best_so_far << ','
      << r.center_reward << ',' << csv_field(r.center_program);
  return out.str();
}

std::string trajectory_csv(const SearchResult& result) {
  std::ostringstream out;
  out.precision(10);
  const Eigen::Index d = result.log.empty() ? 0 : result.log.front().center.size();
  out << "iteration";
  for (Eigen::Index i = 0; i < d; ++i) out << ",z" << i;
  out << '\n';
  for (const IterationLog& r : result.log) {
    out << r.iteration;
    for (Eigen::Index i = 0; i < r.center.size(); ++i) out << ',' << r.center(i);
    out << '\n';
  }
  return out.str();
}

}  // namespace progsynth::search
