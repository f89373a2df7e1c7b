// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/harness/api.hpp"

#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

#include "httplib.h"
#include "progsynth/dsl/edit_distance.hpp"
#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"
#include "progsynth/embedding/network.hpp"
#include "progsynth/rng.hpp"
#include "progsynth/search/program_search.hpp"
#include "progsynth/tasks.hpp"

namespace progsynth::harness {

namespace {

using nlohmann::json;

/// Raised inside handlers; carries the HTTP status and body.
struct HttpError {
  int status;
  json body;
};

[[noreturn]] void fail(int status, const std::string& message) { throw HttpError{status, {{"error", message}}}; }

const json& field(const json& req, const char* name) {
  if (!req.is_object() || !req.contains(name)) fail(400, std::string("missing field '") + name + "'");
  return req.at(name);
}

std::string string_field(const json& req, const char* name) {
  const json& v = field(req, name);
  if (!v.is_string()) fail(400, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

uint64_t seed_field(const json& req, const char* name) {
  if (!req.contains(name)) return 0;
  const json& v = req.at(name);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<int64_t>() < 0)) {
    fail(400, std::string("field '") + name + "' must be a non-negative integer");
  }
  return v.get<uint64_t>();
}

/// Parses program text or throws a 400 carrying the parser diagnostics.
dsl::Program parse_or_400(const std::string& text, const char* which) {
  try {
    return dsl::parse(text);
  } catch (const dsl::ParseError& e) {
    throw HttpError{400, {{"ok", false}, {"field", which}, {"index", e.index()}, {"message", e.what()}}};
  }
}

TaskKind task_or_400(const std::string& name) {
  try {
    return task_from_name(name);
  } catch (const std::invalid_argument& e) {
    fail(400, e.what());
  }
}

const char* dir_name(Direction d) {
  switch (d) {
    case Direction::kNorth: return "north";
    case Direction::kEast: return "east";
    case Direction::kSouth: return "south";
    case Direction::kWest: return "west";
  }
  return "east";
}

json frame_json(const GridState& s, int index, const Rollout& r) {
  json markers = json::array();
  for (int row = 0; row < s.height(); ++row) {
    for (int col = 0; col < s.width(); ++col) {
      if (s.markers(row, col) > 0) markers.push_back({row, col, s.markers(row, col)});
    }
  }
  json f = {{"index", index},
            {"agent", {{"row", s.agent().row}, {"col", s.agent().col}, {"dir", dir_name(s.agent_dir())}}},
            {"markers", markers},
            {"action", nullptr},
            {"node", nullptr}};
  if (index > 0) {
    f["action"] = std::string(action_name(r.actions[static_cast<size_t>(index - 1)]));
    f["node"] = r.action_nodes[static_cast<size_t>(index - 1)];
  }
  return f;
}

/// Everything the debugger needs to replay one run.
json rollout_json(const dsl::Program& program, const TaskInstance& inst) {
  const Rollout r = dsl::execute(program, inst.initial, inst.spec.horizon);
  json walls = json::array();
  for (int row = 0; row < inst.initial.height(); ++row) {
    std::string line;
    for (int col = 0; col < inst.initial.width(); ++col) line += inst.initial.is_wall(row, col) ? '#' : '.';
    walls.push_back(line);
  }
  json frames = json::array();
  const std::vector<GridState> states = r.states();
  for (size_t t = 0; t < states.size(); ++t) frames.push_back(frame_json(states[t], static_cast<int>(t), r));
  json actions = json::array();
  json flags = json::array();
  for (size_t t = 0; t < r.actions.size(); ++t) {
    actions.push_back(std::string(action_name(r.actions[t])));
    flags.push_back({{"blocked", r.flags[t].blocked},
                     {"empty_pick", r.flags[t].empty_pick},
                     {"overflow", r.flags[t].overflow}});
  }
  json spans = json::array();
  const std::vector<dsl::TokenSpan> sp = dsl::statement_spans(program);
  for (size_t id = 0; id < sp.size(); ++id) spans.push_back({{"id", id}, {"begin", sp[id].begin}, {"end", sp[id].end}});
  return {{"config_seed", inst.seed},
          {"reward", task_reward(inst, r)},
          {"grid", {{"height", inst.initial.height()}, {"width", inst.initial.width()}, {"walls", walls}}},
          {"frames", frames},
          {"actions", actions},
          {"action_nodes", r.action_nodes},
          {"flags", flags},
          {"terminated", r.terminated == Termination::kStepCap ? "step_cap" : "program_end"},
          {"misplaced_marker", has_misplaced_marker(inst, r)},
          {"program", dsl::to_text(program)},
          {"statements", spans}};
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    fail(400, std::string("request body is not valid JSON: ") + e.what());
  }
}

}  // namespace

ApiService::ApiService(std::optional<embedding::Params> params, ApiOptions options)
    : params_(std::move(params)), options_(options), session_salt_(std::random_device{}()) {
  if (options_.eval_configs < 1) throw std::invalid_argument("eval_configs must be >= 1");
}

ApiResponse ApiService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    if (path == "/tasks") {
      if (method != "GET") fail(405, "use GET");
      return tasks();
    }
    static const std::set<std::string> posts = {"/parse", "/execute", "/edit-distance", "/session/start",
                                                "/session/submit", "/decode"};
    if (!posts.count(path)) fail(404, "no such endpoint: " + path);
    if (method != "POST") fail(405, "use POST");
    const json req = parse_body(body);
    if (path == "/parse") return parse(req);
    if (path == "/execute") return execute(req);
    if (path == "/edit-distance") return edit_distance(req);
    if (path == "/session/start") return session_start(req);
    if (path == "/session/submit") return session_submit(req);
    return decode(req);
  } catch (const HttpError& e) {
    return {e.status, e.body};
  } catch (const std::exception& e) {
    return {500, {{"error", e.what()}}};
  }
}

ApiResponse ApiService::parse(const json& req) const {
  try {
    const dsl::Program p = parse_or_400(string_field(req, "program"), "program");
    return {200, {{"ok", true}, {"program", dsl::to_text(p)}, {"statements", dsl::count_statements(p)}}};
  } catch (const HttpError& e) {
    return {e.status, e.body};
  }
}

ApiResponse ApiService::execute(const json& req) const {
  try {
    const dsl::Program program = parse_or_400(string_field(req, "program"), "program");
    const TaskKind kind = task_or_400(string_field(req, "task"));
    const uint64_t seed = seed_field(req, "seed");
    TaskSpec spec = default_spec(kind);
    if (req.contains("height") || req.contains("width")) {
      const int h = req.value("height", spec.height);
      const int w = req.value("width", spec.width);
      if (h < 4 || w < 4 || h > options_.max_grid || w > options_.max_grid) fail(400, "grid size out of range");
      spec = scaled_spec(kind, h, w);
    }
    std::vector<TaskInstance> insts;
    try {
      insts = search::task_instances(spec, options_.eval_configs, seed);
    } catch (const std::invalid_argument& e) {
      fail(400, e.what());
    }
    json out = rollout_json(program, insts.front());
    out["task"] = std::string(task_name(kind));
    out["seed"] = seed;
    out["mean_reward"] = search::mean_return(program, insts);
    out["configs"] = options_.eval_configs;
    return {200, out};
  } catch (const HttpError& e) {
    return {e.status, e.body};
  }
}

ApiResponse ApiService::edit_distance(const json& req) const {
  try {
    const dsl::Program a = parse_or_400(string_field(req, "original"), "original");
    const dsl::Program b = parse_or_400(string_field(req, "edited"), "edited");
    return {200, {{"distance", dsl::statement_edit_distance(a, b)}}};
  } catch (const HttpError& e) {
    return {e.status, e.body};
  }
}

ApiResponse ApiService::session_start(const json& req) {
  try {
    const dsl::Program program = parse_or_400(string_field(req, "program"), "program");
    const TaskKind kind = task_or_400(string_field(req, "task"));
    const int budget = req.value("budget", 3);
    if (budget != 3 && budget != 5) fail(400, "budget must be 3 or 5");
    Session s;
    s.task = std::string(task_name(kind));
    s.original = dsl::to_text(program);
    s.seed = seed_field(req, "seed");
    s.budget = budget;
    const auto insts = search::task_instances(default_spec(kind), options_.eval_configs, s.seed);
    s.orig_reward = search::mean_return(program, insts);
    std::string id;
    {
      std::lock_guard<std::mutex> lock(mu_);
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(derive_seed(session_salt_, next_session_++)));
      id = buf;
      sessions_[id] = s;
    }
    return {200,
            {{"session", id},
             {"task", s.task},
             {"budget", s.budget},
             {"original", s.original},
             {"orig_reward", s.orig_reward},
             {"best_so_far", nullptr},
             {"rollout", rollout_json(program, insts.front())}}};
  } catch (const HttpError& e) {
    return {e.status, e.body};
  }
}

ApiResponse ApiService::session_submit(const json& req) {
  try {
    const std::string id = string_field(req, "session");
    const std::string edited_text = string_field(req, "edited");
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) fail(404, "unknown session '" + id + "'");
    Session& s = it->second;
    const dsl::Program edited = parse_or_400(edited_text, "edited");
    const int distance = dsl::statement_edit_distance(dsl::parse(s.original), edited);
    const json best = s.best ? json(*s.best) : json(nullptr);
    if (distance > s.budget) {
      return {422,
              {{"error", "Issue with Code? The edit uses " + std::to_string(distance) +
                             " statement modifications but only " + std::to_string(s.budget) + " are allowed."},
               {"distance", distance},
               {"budget", s.budget},
               {"within_budget", false},
               {"best_so_far", best}}};
    }
    const auto insts = search::task_instances(default_spec(task_from_name(s.task)), options_.eval_configs, s.seed);
    const double reward = search::mean_return(edited, insts);
    s.best = s.best ? std::max(*s.best, reward) : reward;
    ++s.submissions;
    return {200,
            {{"reward", reward},
             {"distance", distance},
             {"budget", s.budget},
             {"within_budget", true},
             {"best_so_far", *s.best},
             {"orig_reward", s.orig_reward},
             {"submissions", s.submissions},
             {"rollout", rollout_json(edited, insts.front())}}};
  } catch (const HttpError& e) {
    return {e.status, e.body};
  }
}

ApiResponse ApiService::tasks() const {
  json list = json::array();
  for (TaskKind k : kAllTasks) {
    const TaskSpec spec = default_spec(k);
    list.push_back({{"name", std::string(task_name(k))},
                    {"height", spec.height},
                    {"width", spec.width},
                    {"horizon", spec.horizon},
                    {"min_reward", spec.min_reward()},
                    {"max_reward", spec.max_reward()},
                    {"reference_program", builtin_corpus().task_program(std::string(task_name(k)))}});
  }
  return {200, {{"tasks", list}}};
}

ApiResponse ApiService::decode(const json& req) const {
  try {
    if (!params_) fail(503, "no checkpoint loaded");
    const int d = params_->dims.latent;
    Eigen::VectorXd z(d);
    if (req.contains("latent")) {
      const json& v = req.at("latent");
      if (!v.is_array() || static_cast<int>(v.size()) != d) fail(400, "latent must be an array of " + std::to_string(d) + " numbers");
      for (int i = 0; i < d; ++i) {
        if (!v[static_cast<size_t>(i)].is_number()) fail(400, "latent must contain numbers");
        z(i) = v[static_cast<size_t>(i)].get<double>();
      }
    } else {
      const dsl::Program p = parse_or_400(string_field(req, "program"), "program");
      z = embedding::encode_one(*params_, dsl::to_tokens(p)).mu.col(0);
    }
    const embedding::Decoded out = embedding::decode_one(*params_, z, embedding::DecodeMode::kGreedy);
    return {200, {{"program", dsl::detokenize(out.tokens)}, {"latent", std::vector<double>(z.data(), z.data() + d)}}};
  } catch (const HttpError& e) {
    return {e.status, e.body};
  }
}

struct ApiServer::Impl {
  httplib::Server server;
  int port = -1;
};

ApiServer::ApiServer(ApiService& service) : impl_(std::make_unique<Impl>()) {
  auto route = [&service](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  };
  for (const char* path : {"/parse", "/execute", "/edit-distance", "/session/start", "/session/submit", "/decode"}) {
    impl_->server.Post(path, route);
    impl_->server.Get(path, route);
  }
  impl_->server.Get("/tasks", route);
  impl_->server.Post("/tasks", route);
  impl_->server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  impl_->port = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (impl_->port < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return impl_->port;
}

void ApiServer::listen() {
  if (impl_->port < 0) throw std::logic_error("bind() before listen()");
  impl_->server.listen_after_bind();
}

void ApiServer::start() {
  if (impl_->port < 0) throw std::logic_error("bind() before start()");
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace progsynth::harness
