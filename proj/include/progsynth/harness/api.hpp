// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "json.hpp"
#include "progsynth/embedding/model.hpp"
#include "progsynth/harness/corpus.hpp"

namespace progsynth::harness {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ApiOptions {
  /// Configurations averaged into `mean_reward` and session rewards.
  int eval_configs = 10;
  /// Grid sizes accepted by /execute overrides.
  int max_grid = 100;
};

/*!
 * \brief Transport-independent handlers for the debugging API.
 *
 *   POST /parse          {program}                   -> {ok} | 400 {ok:false, index, message}
 *   POST /execute        {program, task, seed}       -> reward, frames, flags, per-action node ids
 *   POST /edit-distance  {original, edited}          -> {distance}
 *   POST /session/start  {task, program, budget, seed} -> {session, orig_reward, ...}
 *   POST /session/submit {session, edited}           -> {reward, distance, within_budget, best_so_far}
 *   GET  /tasks                                      -> task list with grid sizes
 *   POST /decode         {program} | {latent}        -> {program}, needs a checkpoint
 *
 * Malformed programs give 400 with the offending token index, budget
 * violations 422, unknown sessions 404.
 */
class ApiService {
 public:
  explicit ApiService(std::optional<embedding::Params> params = std::nullopt, ApiOptions options = {});

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

  ApiResponse parse(const nlohmann::json& req) const;
  ApiResponse execute(const nlohmann::json& req) const;
  ApiResponse edit_distance(const nlohmann::json& req) const;
  ApiResponse session_start(const nlohmann::json& req);
  ApiResponse session_submit(const nlohmann::json& req);
  ApiResponse tasks() const;
  ApiResponse decode(const nlohmann::json& req) const;

 private:
  struct Session {
    std::string task;
    std::string original;
    uint64_t seed = 0;
    int budget = 3;
    double orig_reward = 0.0;
    std::optional<double> best;
    int submissions = 0;
  };

  std::optional<embedding::Params> params_;
  ApiOptions options_;
  std::mutex mu_;
  std::map<std::string, Session> sessions_;
  uint64_t next_session_ = 0;
  uint64_t session_salt_;
};

/// HTTP front end for an ApiService; the service must outlive the server.
class ApiServer {
 public:
  explicit ApiServer(ApiService& service);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace progsynth::harness
