// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "progsynth/dsl/token.hpp"
#include "progsynth/rng.hpp"
#include "progsynth/world.hpp"

namespace progsynth::embedding {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Perception bits plus a one-hot of the previous action (slot 5 = none yet).
inline constexpr int kPolicyInputs = 5 + kNumActions + 1;

struct ModelDims {
  int embed = 32;
  int hidden = 64;
  int latent = 64;
  int policy_hidden = 64;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

void to_json(nlohmann::json& j, const ModelDims& d);
void from_json(const nlohmann::json& j, ModelDims& d);

/*!
 * \brief Gated recurrent cell, gate order (reset, update, candidate).
 *
 * `ws` maps a per-sequence conditioning vector that is constant over time;
 * it has zero columns when the cell has no such input.
 */
struct GruParams {
  MatrixXd wx;  // 3H x I
  MatrixXd ws;  // 3H x S
  MatrixXd wh;  // 3H x H
  MatrixXd bx;  // 3H x 1
  MatrixXd bh;  // 3H x 1
};

/*!
 * \brief All trainable tensors. Biases are stored as one-column matrices so
 * every tensor can be visited uniformly.
 */
struct Params {
  ModelDims dims;

  MatrixXd enc_embed;  // E x V
  GruParams enc;
  MatrixXd mu_w, mu_b;
  MatrixXd logsig_w, logsig_b;

  MatrixXd dec_embed;  // E x V
  MatrixXd init_w, init_b;  // H x D, initial decoder state from z
  GruParams dec;
  MatrixXd out_w, out_b;  // V x H

  GruParams pol;
  MatrixXd p1_w, p1_b;
  MatrixXd p2_w, p2_b;
  MatrixXd p3_w, p3_b;  // A x P

  static Params zeros(const ModelDims& dims);
  /// Uniform(+-1/sqrt(fan_in)) weights, standard-normal embeddings.
  static Params init(const ModelDims& dims, Rng& rng);

  void visit(const std::function<void(const std::string&, MatrixXd&)>& fn);
  void visit(const std::function<void(const std::string&, const MatrixXd&)>& fn) const;

  void set_zero();
  size_t size() const;
  /// this += scale * other
  void add_scaled(const Params& other, double scale);
  double squared_norm() const;
  bool all_finite() const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*!
 * \brief Binary checkpoint: "PSCK", format version, vocabulary hash, a JSON
 * header (dims, vocabulary, caller metadata) and little-endian float64 tensors
 * in visit order, each prefixed by its shape.
 */
void save_checkpoint(const Params& params, const nlohmann::json& meta, const std::filesystem::path& path);
Params load_checkpoint(const std::filesystem::path& path, nlohmann::json* meta = nullptr);

/// FNV-1a over the tensor bytes; identifies a checkpoint's weights.
uint64_t params_hash(const Params& params);

}  // namespace progsynth::embedding
