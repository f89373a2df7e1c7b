// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "progsynth/dsl/edit_distance.hpp"
#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"
#include "progsynth/embedding/model.hpp"
#include "progsynth/embedding/network.hpp"
#include "progsynth/harness/api.hpp"
#include "progsynth/harness/corpus.hpp"
#include "progsynth/search/cem.hpp"
#include "progsynth/search/program_search.hpp"
#include "progsynth/tasks.hpp"

namespace py = pybind11;
using namespace progsynth;

namespace {

/// (ok, canonical text, error index, message)
std::tuple<bool, std::string, int, std::string> check(const std::string& text) {
  try {
    return {true, dsl::to_text(dsl::parse(text)), -1, ""};
  } catch (const dsl::ParseError& e) {
    return {false, "", e.index(), e.what()};
  }
}

int edit_distance(const std::string& a, const std::string& b) {
  return dsl::statement_edit_distance(dsl::parse(a), dsl::parse(b));
}

double r_mat(const std::string& candidate, const std::string& reference, uint64_t seed, int n) {
  const auto states = search::reconstruction_states(seed, n);
  return dsl::r_mat(dsl::parse(candidate), dsl::parse(reference), states);
}

class Model {
 public:
  explicit Model(const std::string& path) : params_(embedding::load_checkpoint(path)) {}

  int latent_dim() const { return params_.dims.latent; }
  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(embedding::params_hash(params_)));
    return buf;
  }
  Eigen::VectorXd encode(const std::string& text) const {
    return embedding::encode_one(params_, dsl::to_tokens(dsl::parse(text))).mu.col(0);
  }
  std::string decode(const Eigen::VectorXd& z) const {
    if (z.size() != params_.dims.latent) throw py::value_error("latent has the wrong dimension");
    const auto d = embedding::decode_one(params_, z, embedding::DecodeMode::kGreedy);
    return dsl::to_text(dsl::parse(d.tokens));
  }
  const embedding::Params& params() const { return params_; }

 private:
  embedding::Params params_;
};

class Api {
 public:
  explicit Api(const std::optional<std::string>& checkpoint, int eval_configs)
      : service_(checkpoint ? std::optional(embedding::load_checkpoint(*checkpoint)) : std::nullopt,
                 harness::ApiOptions{eval_configs, 100}) {}

  std::pair<int, std::string> request(const std::string& method, const std::string& path, const std::string& body) {
    py::gil_scoped_release release;
    const harness::ApiResponse r = service_.handle(method, path, body);
    return {r.status, r.body.dump()};
  }

 private:
  harness::ApiService service_;
};

py::dict cem(const std::function<std::vector<double>(const Eigen::MatrixXd&)>& fn, int dim, int population,
             double sigma, double elite_fraction, int max_iters, double max_reward, const std::string& init,
             uint64_t seed) {
  search::CemConfig cfg;
  cfg.population = population;
  cfg.sigma = sigma;
  cfg.elite_fraction = elite_fraction;
  cfg.max_iters = max_iters;
  cfg.max_reward = max_reward;
  cfg.init = search::init_from_name(init);
  if (const std::string err = cfg.validate(); !err.empty()) throw py::value_error(err);
  const search::BatchEvaluator eval = [&fn](const Eigen::MatrixXd& z) {
    const std::vector<double> rewards = fn(z);
    if (static_cast<Eigen::Index>(rewards.size()) != z.cols())
      throw py::value_error("reward function must return one value per column");
    std::vector<search::Candidate> out(rewards.size());
    for (size_t i = 0; i < rewards.size(); ++i) out[i].reward = rewards[i];
    return out;
  };
  const search::SearchResult res = search::cem_search(eval, dim, cfg, seed);
  std::vector<double> best_so_far;
  for (const auto& row : res.log) best_so_far.push_back(row.best_so_far);
  py::dict d;
  d["best_reward"] = res.best_reward;
  d["best_latent"] = res.best_latent;
  d["center"] = res.center;
  d["iterations"] = res.iterations;
  d["converged"] = res.converged;
  d["best_so_far"] = best_so_far;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Karel program embedding and latent search";

  m.def("check", &check, py::arg("text"), "Parse a program; returns (ok, canonical, index, message).");
  m.def("tokens", [](const std::string& text) {
    std::vector<std::string> out;
    for (dsl::Token t : dsl::to_tokens(dsl::parse(text))) out.emplace_back(dsl::token_text(t));
    return out;
  });
  m.def("edit_distance", &edit_distance, py::arg("original"), py::arg("edited"));
  m.def("r_mat", &r_mat, py::arg("candidate"), py::arg("reference"), py::arg("seed") = 0, py::arg("n") = 10);
  m.def("task_names", [] {
    std::vector<std::string> out;
    for (TaskKind k : kAllTasks) out.emplace_back(task_name(k));
    return out;
  });
  m.def("reference_programs", [] {
    const harness::ReferenceCorpus& c = harness::builtin_corpus();
    py::dict d, rec, tasks;
    for (const auto& [name, text] : c.reconstruction) rec[py::str(name)] = text;
    for (const auto& [name, text] : c.tasks) tasks[py::str(name)] = text;
    d["reconstruction"] = rec;
    d["tasks"] = tasks;
    return d;
  });
  m.def("task_return", [](const std::string& program, const std::string& task, uint64_t seed, int n, int grid) {
    const TaskKind kind = task_from_name(task);
    const TaskSpec spec = grid > 0 ? scaled_spec(kind, grid, grid) : default_spec(kind);
    const auto instances = search::task_instances(spec, n, seed);
    return search::mean_return(dsl::parse(program), instances);
  }, py::arg("program"), py::arg("task"), py::arg("seed") = 0, py::arg("n") = 10, py::arg("grid") = 0);

  m.def("cem", &cem, py::arg("fn"), py::arg("dim"), py::arg("population") = 16, py::arg("sigma") = 0.25,
        py::arg("elite_fraction") = 0.1, py::arg("max_iters") = 1000, py::arg("max_reward") = 1.0,
        py::arg("init") = "narrow", py::arg("seed") = 0);

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("path"))
      .def_property_readonly("latent_dim", &Model::latent_dim)
      .def_property_readonly("hash", &Model::hash)
      .def("encode", &Model::encode, py::arg("program"))
      .def("decode", &Model::decode, py::arg("z"));

  py::class_<Api>(m, "Api")
      .def(py::init<const std::optional<std::string>&, int>(), py::arg("checkpoint") = std::nullopt,
           py::arg("eval_configs") = 10)
      .def("request", &Api::request, py::arg("method"), py::arg("path"), py::arg("body") = "");

  py::register_exception<dsl::ParseError>(m, "ParseError", PyExc_ValueError);
}
