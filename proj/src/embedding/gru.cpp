// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/embedding/gru.hpp"

#include <algorithm>
#include <numeric>

namespace progsynth::embedding {

namespace {

MatrixXd sigmoid(const MatrixXd& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

}  // namespace

Packing Packing::from_lengths(const std::vector<int>& lengths) {
  Packing pk;
  pk.order.resize(lengths.size());
  std::iota(pk.order.begin(), pk.order.end(), 0);
  std::stable_sort(pk.order.begin(), pk.order.end(), [&](int a, int b) { return lengths[a] > lengths[b]; });
  for (int i : pk.order) pk.lengths.push_back(lengths[i]);
  const int steps = pk.lengths.empty() ? 0 : pk.lengths.front();
  int active = static_cast<int>(pk.lengths.size());
  for (int t = 0; t < steps; ++t) {
    while (active > 0 && pk.lengths[active - 1] <= t) --active;
    pk.offsets.push_back(pk.total);
    pk.batch_sizes.push_back(active);
    pk.total += active;
  }
  return pk;
}

void gru_forward(const GruParams& p, const Packing& pk, const MatrixXd& x, const MatrixXd& s, const MatrixXd& h0,
                 GruTape& tape) {
  const Eigen::Index h = p.wh.cols();
  tape.h0 = h0;
  MatrixXd gx = p.wx * x;
  gx.colwise() += p.bx.col(0);
  MatrixXd gs;
  if (p.ws.cols() > 0) gs = p.ws * s;
  tape.hs.resize(h, pk.total);
  tape.r.resize(h, pk.total);
  tape.u.resize(h, pk.total);
  tape.n.resize(h, pk.total);
  tape.ghn.resize(h, pk.total);
  for (int t = 0; t < pk.steps(); ++t) {
    const int n = pk.batch_sizes[t];
    const int off = pk.offsets[t];
    const MatrixXd hprev = t == 0 ? MatrixXd(h0.leftCols(n)) : MatrixXd(tape.hs.middleCols(pk.offsets[t - 1], n));
    MatrixXd g = gx.middleCols(off, n);
    if (gs.size() > 0) g += gs.leftCols(n);
    MatrixXd gh = p.wh * hprev;
    gh.colwise() += p.bh.col(0);
    const MatrixXd r = sigmoid(g.topRows(h) + gh.topRows(h));
    const MatrixXd u = sigmoid(g.middleRows(h, h) + gh.middleRows(h, h));
    const MatrixXd ghn = gh.bottomRows(h);
    const MatrixXd cand = (g.bottomRows(h).array() + r.array() * ghn.array()).tanh().matrix();
    tape.hs.middleCols(off, n) = ((1.0 - u.array()) * cand.array() + u.array() * hprev.array()).matrix();
    tape.r.middleCols(off, n) = r;
    tape.u.middleCols(off, n) = u;
    tape.n.middleCols(off, n) = cand;
    tape.ghn.middleCols(off, n) = ghn;
  }
}

MatrixXd gru_final(const Packing& pk, const GruTape& tape) {
  MatrixXd out = tape.h0;
  for (int k = 0; k < pk.sequences(); ++k) {
    const int len = pk.lengths[k];
    if (len > 0) out.col(k) = tape.hs.col(pk.column(len - 1, k));
  }
  return out;
}

void gru_backward(const GruParams& p, const Packing& pk, const MatrixXd& x, const MatrixXd& s, const GruTape& tape,
                  const MatrixXd& dhs, const MatrixXd& dfinal, GruParams& grad, MatrixXd* dx, MatrixXd* ds,
                  MatrixXd* dh0) {
  const Eigen::Index h = p.wh.cols();
  const int b = pk.sequences();
  MatrixXd dh = dfinal.size() > 0 ? dfinal : MatrixXd::Zero(h, b);
  MatrixXd dgx(3 * h, pk.total);
  MatrixXd dgh(3 * h, pk.total);
  MatrixXd hprev_all(h, pk.total);
  for (int t = pk.steps() - 1; t >= 0; --t) {
    const int n = pk.batch_sizes[t];
    const int off = pk.offsets[t];
    if (dhs.size() > 0) dh.leftCols(n) += dhs.middleCols(off, n);
    if (t == 0) {
      hprev_all.middleCols(off, n) = tape.h0.leftCols(n);
    } else {
      hprev_all.middleCols(off, n) = tape.hs.middleCols(pk.offsets[t - 1], n);
    }
    const auto hprev = hprev_all.middleCols(off, n).array();
    const auto r = tape.r.middleCols(off, n).array();
    const auto u = tape.u.middleCols(off, n).array();
    const auto cand = tape.n.middleCols(off, n).array();
    const auto ghn = tape.ghn.middleCols(off, n).array();
    const Eigen::ArrayXXd dho = dh.leftCols(n).array();

    const Eigen::ArrayXXd dan = dho * (1.0 - u) * (1.0 - cand * cand);
    const Eigen::ArrayXXd dau = dho * (hprev - cand) * u * (1.0 - u);
    const Eigen::ArrayXXd dar = dan * ghn * r * (1.0 - r);
    dgx.block(0, off, h, n) = dar.matrix();
    dgx.block(h, off, h, n) = dau.matrix();
    dgx.block(2 * h, off, h, n) = dan.matrix();
    dgh.block(0, off, h, n) = dar.matrix();
    dgh.block(h, off, h, n) = dau.matrix();
    dgh.block(2 * h, off, h, n) = (dan * r).matrix();
    const MatrixXd through = p.wh.transpose() * dgh.middleCols(off, n);
    dh.leftCols(n) = (dho * u).matrix() + through;
  }
  grad.wx.noalias() += dgx * x.transpose();
  grad.bx.col(0) += dgx.rowwise().sum();
  grad.wh.noalias() += dgh * hprev_all.transpose();
  grad.bh.col(0) += dgh.rowwise().sum();
  if (p.ws.cols() > 0) {
    MatrixXd dgs = MatrixXd::Zero(3 * h, b);
    for (int t = 0; t < pk.steps(); ++t) dgs.leftCols(pk.batch_sizes[t]) += dgx.middleCols(pk.offsets[t], pk.batch_sizes[t]);
    grad.ws.noalias() += dgs * s.transpose();
    if (ds != nullptr) *ds = p.ws.transpose() * dgs;
  }
  if (dx != nullptr) *dx = p.wx.transpose() * dgx;
  if (dh0 != nullptr) *dh0 = dh;
}

void gru_step(const GruParams& p, const MatrixXd& gx, MatrixXd& hstate) {
  const Eigen::Index h = p.wh.cols();
  MatrixXd gh = p.wh * hstate;
  gh.colwise() += p.bh.col(0);
  const MatrixXd r = sigmoid(gx.topRows(h) + gh.topRows(h));
  const MatrixXd u = sigmoid(gx.middleRows(h, h) + gh.middleRows(h, h));
  const Eigen::ArrayXXd cand = (gx.bottomRows(h).array() + r.array() * gh.bottomRows(h).array()).tanh();
  hstate = ((1.0 - u.array()) * cand + u.array() * hstate.array()).matrix();
}

}  // namespace progsynth::embedding
