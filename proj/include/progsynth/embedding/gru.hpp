// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "progsynth/embedding/model.hpp"

namespace progsynth::embedding {

/*!
 * \brief Layout of a batch of variable-length sequences, longest first.
 *
 * Step t holds the first batch_sizes[t] sequences of the sorted order in
 * columns [offsets[t], offsets[t] + batch_sizes[t]) of a packed matrix.
 * Per-sequence matrices (initial states, conditioning vectors) use the sorted
 * order too.
 */
struct Packing {
  std::vector<int> order;  // sorted position -> original index
  std::vector<int> lengths;  // by sorted position
  std::vector<int> batch_sizes;
  std::vector<int> offsets;
  int total = 0;

  static Packing from_lengths(const std::vector<int>& lengths);
  int steps() const { return static_cast<int>(batch_sizes.size()); }
  int sequences() const { return static_cast<int>(order.size()); }
  int column(int t, int k) const { return offsets[t] + k; }
};

/// Forward values kept for the backward pass.
struct GruTape {
  MatrixXd h0;  // H x B
  MatrixXd hs;  // H x total, the cell outputs
  MatrixXd r, u, n, ghn;  // H x total gate activations and Wh_n h + bh_n
};

/// x: I x total packed inputs; s: S x B conditioning (may have zero rows).
void gru_forward(const GruParams& p, const Packing& pk, const MatrixXd& x, const MatrixXd& s, const MatrixXd& h0,
                 GruTape& tape);

/// Hidden state after each sequence's last step (h0 for empty sequences), H x B.
MatrixXd gru_final(const Packing& pk, const GruTape& tape);

/*!
 * \brief Accumulates parameter gradients into `grad`.
 *
 * `dhs` (H x total) and `dfinal` (H x B) are upstream gradients for the step
 * outputs and the final states; either may be empty. Input gradients are
 * written to the non-null outputs.
 */
void gru_backward(const GruParams& p, const Packing& pk, const MatrixXd& x, const MatrixXd& s, const GruTape& tape,
                  const MatrixXd& dhs, const MatrixXd& dfinal, GruParams& grad, MatrixXd* dx, MatrixXd* ds,
                  MatrixXd* dh0);

/// One step for inference: updates h (H x B) in place.
void gru_step(const GruParams& p, const MatrixXd& gx, MatrixXd& h);

}  // namespace progsynth::embedding
