// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/embedding/network.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "progsynth/dsl/interpreter.hpp"
#include "progsynth/dsl/parser.hpp"
#include "progsynth/embedding/gru.hpp"

namespace progsynth::embedding {

namespace {

using dsl::Token;
using dsl::TokenSet;

constexpr int kVocab = dsl::kVocabSize;
const int kStartIndex = dsl::index_of(Token::kStart);
const int kEndIndex = dsl::index_of(Token::kEnd);

MatrixXd gather_cols(const MatrixXd& m, const std::vector<int>& cols) {
  MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  return out;
}

// Masked log-softmax of one logit column; returns log-probabilities (-inf for illegal).
Eigen::VectorXd masked_log_softmax(const Eigen::Ref<const VectorXd>& logits, const TokenSet& legal) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kVocab; ++i) {
    if (legal.test(i)) mx = std::max(mx, logits(i));
  }
  double sum = 0.0;
  for (int i = 0; i < kVocab; ++i) {
    if (legal.test(i)) sum += std::exp(logits(i) - mx);
  }
  const double lse = mx + std::log(sum);
  VectorXd out(kVocab);
  for (int i = 0; i < kVocab; ++i) {
    out(i) = legal.test(i) ? logits(i) - lse : -std::numeric_limits<double>::infinity();
  }
  return out;
}

struct EncoderPass {
  Packing pk;
  MatrixXd x;
  GruTape tape;
  MatrixXd hf;  // H x B, original order
  std::vector<const std::vector<Token>*> programs;
};

Encoding run_encoder(const Params& p, const std::vector<const std::vector<Token>*>& programs, EncoderPass& pass) {
  const int b = static_cast<int>(programs.size());
  const int h = p.dims.hidden;
  std::vector<int> lengths;
  for (const auto* prog : programs) lengths.push_back(static_cast<int>(prog->size()));
  pass.programs = programs;
  pass.pk = Packing::from_lengths(lengths);
  pass.x.resize(p.dims.embed, pass.pk.total);
  for (int t = 0; t < pass.pk.steps(); ++t) {
    for (int k = 0; k < pass.pk.batch_sizes[t]; ++k) {
      pass.x.col(pass.pk.column(t, k)) = p.enc_embed.col(dsl::index_of((*programs[pass.pk.order[k]])[t]));
    }
  }
  gru_forward(p.enc, pass.pk, pass.x, MatrixXd(0, b), MatrixXd::Zero(h, b), pass.tape);
  const MatrixXd sorted = gru_final(pass.pk, pass.tape);
  pass.hf.resize(h, b);
  for (int k = 0; k < b; ++k) pass.hf.col(pass.pk.order[k]) = sorted.col(k);
  Encoding enc;
  enc.mu = p.mu_w * pass.hf;
  enc.mu.colwise() += p.mu_b.col(0);
  enc.log_sigma = p.logsig_w * pass.hf;
  enc.log_sigma.colwise() += p.logsig_b.col(0);
  return enc;
}

void encoder_backward(const Params& p, const EncoderPass& pass, const MatrixXd& dmu, const MatrixXd& dls, Params& g) {
  g.mu_w.noalias() += dmu * pass.hf.transpose();
  g.mu_b.col(0) += dmu.rowwise().sum();
  g.logsig_w.noalias() += dls * pass.hf.transpose();
  g.logsig_b.col(0) += dls.rowwise().sum();
  const MatrixXd dhf = p.mu_w.transpose() * dmu + p.logsig_w.transpose() * dls;
  const int b = pass.pk.sequences();
  MatrixXd dfinal(dhf.rows(), b);
  for (int k = 0; k < b; ++k) dfinal.col(k) = dhf.col(pass.pk.order[k]);
  MatrixXd dx;
  gru_backward(p.enc, pass.pk, pass.x, MatrixXd(0, b), pass.tape, MatrixXd(), dfinal, g.enc, &dx, nullptr, nullptr);
  for (int t = 0; t < pass.pk.steps(); ++t) {
    for (int k = 0; k < pass.pk.batch_sizes[t]; ++k) {
      g.enc_embed.col(dsl::index_of((*pass.programs[pass.pk.order[k]])[t])) += dx.col(pass.pk.column(t, k));
    }
  }
}

// Teacher-forced decoder over `targets` (each ending in <end>). Returns the
// summed NLL per sequence; with `grad`, accumulates weights[j] * dNLL_j and
// adds the latent gradient to `dz`.
std::vector<double> decoder_pass(const Params& p, const MatrixXd& z, const std::vector<std::vector<int>>& targets,
                                 const std::vector<const std::vector<TokenSet>*>& masks,
                                 const std::vector<double>& weights, Params* grad, MatrixXd* dz, LossReport* report) {
  const int b = static_cast<int>(targets.size());
  std::vector<int> lengths;
  for (const auto& t : targets) lengths.push_back(static_cast<int>(t.size()));
  const Packing pk = Packing::from_lengths(lengths);
  const MatrixXd s = gather_cols(z, pk.order);
  MatrixXd h0 = p.init_w * s;
  h0.colwise() += p.init_b.col(0);
  h0 = h0.array().tanh().matrix();

  MatrixXd x(p.dims.embed, pk.total);
  for (int t = 0; t < pk.steps(); ++t) {
    for (int k = 0; k < pk.batch_sizes[t]; ++k) {
      const int prev = t == 0 ? kStartIndex : targets[pk.order[k]][t - 1];
      x.col(pk.column(t, k)) = p.dec_embed.col(prev);
    }
  }
  GruTape tape;
  gru_forward(p.dec, pk, x, s, h0, tape);
  MatrixXd logits = p.out_w * tape.hs;
  logits.colwise() += p.out_b.col(0);

  std::vector<double> nll(b, 0.0);
  MatrixXd dlogits;
  if (grad != nullptr) dlogits = MatrixXd::Zero(kVocab, pk.total);
  for (int t = 0; t < pk.steps(); ++t) {
    for (int k = 0; k < pk.batch_sizes[t]; ++k) {
      const int j = pk.order[k];
      const int col = pk.column(t, k);
      const int target = targets[j][t];
      const TokenSet& legal = (*masks[j])[t];
      if (!legal.test(target)) {
        throw std::logic_error("decoder target '" + std::string(dsl::token_text(dsl::token_at(target))) +
                               "' is masked at step " + std::to_string(t));
      }
      const VectorXd logp = masked_log_softmax(logits.col(col), legal);
      nll[j] -= logp(target);
      if (report != nullptr) {
        Eigen::Index best = 0;
        logp.maxCoeff(&best);
        ++report->tokens;
        if (best == target) ++report->tokens_correct;
      }
      if (grad != nullptr && weights[j] != 0.0) {
        for (int i = 0; i < kVocab; ++i) {
          if (legal.test(i)) dlogits(i, col) = weights[j] * std::exp(logp(i));
        }
        dlogits(target, col) -= weights[j];
      }
    }
  }
  if (grad == nullptr) return nll;

  grad->out_w.noalias() += dlogits * tape.hs.transpose();
  grad->out_b.col(0) += dlogits.rowwise().sum();
  const MatrixXd dhs = p.out_w.transpose() * dlogits;
  MatrixXd dx, ds, dh0;
  gru_backward(p.dec, pk, x, s, tape, dhs, MatrixXd(), grad->dec, &dx, &ds, &dh0);
  for (int t = 0; t < pk.steps(); ++t) {
    for (int k = 0; k < pk.batch_sizes[t]; ++k) {
      const int prev = t == 0 ? kStartIndex : targets[pk.order[k]][t - 1];
      grad->dec_embed.col(prev) += dx.col(pk.column(t, k));
    }
  }
  const MatrixXd dpre = (dh0.array() * (1.0 - h0.array().square())).matrix();
  grad->init_w.noalias() += dpre * s.transpose();
  grad->init_b.col(0) += dpre.rowwise().sum();
  ds.noalias() += p.init_w.transpose() * dpre;
  for (int k = 0; k < b; ++k) dz->col(pk.order[k]) += ds.col(k);
  return nll;
}

// Teacher-forced policy over every rollout; sequence i belongs to program owner[i].
double policy_pass(const Params& p, const MatrixXd& z, const std::vector<const Rollout*>& seqs,
                   const std::vector<int>& owner, double weight, Params* grad, MatrixXd* dz, LossReport* report) {
  std::vector<int> lengths;
  for (const Rollout* r : seqs) lengths.push_back(static_cast<int>(r->size()));
  const Packing pk = Packing::from_lengths(lengths);
  const int nseq = pk.sequences();
  if (pk.total == 0) {
    if (report != nullptr) {
      report->rollouts += nseq;
      report->rollouts_exact += nseq;
    }
    return 0.0;
  }
  std::vector<int> owner_sorted;
  for (int k = 0; k < nseq; ++k) owner_sorted.push_back(owner[pk.order[k]]);
  const MatrixXd s = gather_cols(z, owner_sorted);

  MatrixXd x = MatrixXd::Zero(kPolicyInputs, pk.total);
  for (int t = 0; t < pk.steps(); ++t) {
    for (int k = 0; k < pk.batch_sizes[t]; ++k) {
      const Rollout& r = *seqs[pk.order[k]];
      const int col = pk.column(t, k);
      const uint8_t bits = r.perceptions[t].bits();
      for (int i = 0; i < 5; ++i) x(i, col) = (bits >> i) & 1 ? 1.0 : 0.0;
      const int prev = t == 0 ? kNumActions : static_cast<int>(r.actions[t - 1]);
      x(5 + prev, col) = 1.0;
    }
  }
  GruTape tape;
  gru_forward(p.pol, pk, x, s, MatrixXd::Zero(p.dims.policy_hidden, nseq), tape);
  MatrixXd a1 = p.p1_w * tape.hs;
  a1.colwise() += p.p1_b.col(0);
  a1 = a1.array().tanh().matrix();
  MatrixXd a2 = p.p2_w * a1;
  a2.colwise() += p.p2_b.col(0);
  a2 = a2.array().tanh().matrix();
  MatrixXd logits = p.p3_w * a2;
  logits.colwise() += p.p3_b.col(0);

  double loss = 0.0;
  MatrixXd dlogits;
  if (grad != nullptr) dlogits.resize(kNumActions, pk.total);
  std::vector<char> exact(nseq, 1);
  for (int t = 0; t < pk.steps(); ++t) {
    for (int k = 0; k < pk.batch_sizes[t]; ++k) {
      const int col = pk.column(t, k);
      const int target = static_cast<int>(seqs[pk.order[k]]->actions[t]);
      const auto l = logits.col(col);
      const double mx = l.maxCoeff();
      const VectorXd e = (l.array() - mx).exp().matrix();
      const double sum = e.sum();
      loss -= l(target) - mx - std::log(sum);
      Eigen::Index best = 0;
      l.maxCoeff(&best);
      if (best != target) exact[k] = 0;
      if (report != nullptr) {
        ++report->action_steps;
        if (best == target) ++report->actions_correct;
      }
      if (grad != nullptr) {
        dlogits.col(col) = weight * e / sum;
        dlogits(target, col) -= weight;
      }
    }
  }
  if (report != nullptr) {
    report->rollouts += nseq;
    for (char c : exact) report->rollouts_exact += c;
  }
  if (grad == nullptr) return loss;

  grad->p3_w.noalias() += dlogits * a2.transpose();
  grad->p3_b.col(0) += dlogits.rowwise().sum();
  const MatrixXd da2 = ((p.p3_w.transpose() * dlogits).array() * (1.0 - a2.array().square())).matrix();
  grad->p2_w.noalias() += da2 * a1.transpose();
  grad->p2_b.col(0) += da2.rowwise().sum();
  const MatrixXd da1 = ((p.p2_w.transpose() * da2).array() * (1.0 - a1.array().square())).matrix();
  grad->p1_w.noalias() += da1 * tape.hs.transpose();
  grad->p1_b.col(0) += da1.rowwise().sum();
  const MatrixXd dhs = p.p1_w.transpose() * da1;
  MatrixXd ds;
  gru_backward(p.pol, pk, x, s, tape, dhs, MatrixXd(), grad->pol, nullptr, &ds, nullptr);
  for (int k = 0; k < nseq; ++k) dz->col(owner_sorted[k]) += ds.col(k);
  return loss;
}

std::vector<int> with_end(const std::vector<Token>& tokens) {
  std::vector<int> out;
  out.reserve(tokens.size() + 1);
  for (Token t : tokens) out.push_back(dsl::index_of(t));
  out.push_back(kEndIndex);
  return out;
}

}  // namespace

std::vector<TokenSet> teacher_masks(const std::vector<Token>& tokens) {
  dsl::MaskState ms;
  std::vector<TokenSet> out;
  out.reserve(tokens.size() + 1);
  for (Token t : tokens) {
    out.push_back(ms.legal_tokens());
    ms.step(t);
  }
  out.push_back(ms.legal_tokens());
  return out;
}

Encoding encode_batch(const Params& params, const std::vector<const std::vector<Token>*>& programs) {
  EncoderPass pass;
  return run_encoder(params, programs, pass);
}

Encoding encode_one(const Params& params, const std::vector<Token>& program) {
  return encode_batch(params, {&program});
}

MatrixXd reparameterize(const Encoding& enc, const MatrixXd& eps) {
  return enc.mu + (enc.log_sigma.array().exp() * eps.array()).matrix();
}

MatrixXd sample_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  }
  return m;
}

std::vector<Decoded> decode_batch(const Params& p, const MatrixXd& z, DecodeMode mode, Rng* rng) {
  if (mode == DecodeMode::kSample && rng == nullptr) throw std::invalid_argument("sampling needs an rng");
  const Eigen::Index b = z.cols();
  std::vector<Decoded> out(static_cast<size_t>(b));
  std::vector<dsl::MaskState> states(static_cast<size_t>(b));
  std::vector<int> prev(static_cast<size_t>(b), kStartIndex);
  std::vector<char> done(static_cast<size_t>(b), 0);
  MatrixXd h = p.init_w * z;
  h.colwise() += p.init_b.col(0);
  h = h.array().tanh().matrix();
  MatrixXd gs = p.dec.ws * z;
  gs.colwise() += p.dec.bx.col(0);
  MatrixXd x(p.dims.embed, b);
  Eigen::Index remaining = b;
  while (remaining > 0) {
    for (Eigen::Index j = 0; j < b; ++j) x.col(j) = p.dec_embed.col(prev[j]);
    const MatrixXd gx = p.dec.wx * x + gs;
    gru_step(p.dec, gx, h);
    MatrixXd logits = p.out_w * h;
    logits.colwise() += p.out_b.col(0);
    for (Eigen::Index j = 0; j < b; ++j) {
      if (done[j]) continue;
      const TokenSet legal = states[j].legal_tokens();
      const VectorXd logp = masked_log_softmax(logits.col(j), legal);
      int pick = -1;
      if (mode == DecodeMode::kGreedy) {
        Eigen::Index best = 0;
        logp.maxCoeff(&best);
        pick = static_cast<int>(best);
      } else {
        double u = uniform_real(*rng);
        for (int i = 0; i < kVocab; ++i) {
          if (!legal.test(i)) continue;
          pick = i;
          u -= std::exp(logp(i));
          if (u <= 0.0) break;
        }
      }
      const Token tok = dsl::token_at(pick);
      states[j].step(tok);
      out[j].masks.push_back(legal);
      out[j].log_prob += logp(pick);
      if (tok == Token::kEnd) {
        done[j] = 1;
        --remaining;
      } else {
        out[j].tokens.push_back(tok);
        prev[j] = pick;
      }
    }
  }
  return out;
}

Decoded decode_one(const Params& params, const VectorXd& z, DecodeMode mode, Rng* rng) {
  return decode_batch(params, z, mode, rng).front();
}

LossReport compute_loss(const Params& p, const std::vector<Example>& batch, const LossWeights& w,
                        const LossOptions& opt, const MatrixXd& eps, Rng* rng, Params* grad) {
  const int b = static_cast<int>(batch.size());
  if (b == 0) throw std::invalid_argument("empty batch");
  LossReport rep;
  std::vector<const std::vector<Token>*> programs;
  for (const Example& e : batch) programs.push_back(e.tokens);
  EncoderPass enc_pass;
  const Encoding enc = run_encoder(p, programs, enc_pass);
  const MatrixXd sigma = enc.log_sigma.array().exp().matrix();
  const MatrixXd z = enc.mu + (sigma.array() * eps.array()).matrix();
  MatrixXd dz = MatrixXd::Zero(z.rows(), b);
  MatrixXd dmu = MatrixXd::Zero(z.rows(), b);
  MatrixXd dls = MatrixXd::Zero(z.rows(), b);

  if (w.program != 0.0) {
    std::vector<std::vector<int>> targets;
    std::vector<const std::vector<TokenSet>*> masks;
    for (const Example& e : batch) {
      targets.push_back(with_end(*e.tokens));
      masks.push_back(e.masks);
    }
    const std::vector<double> weights(b, w.program / b);
    const auto nll = decoder_pass(p, z, targets, masks, weights, grad, &dz, &rep);
    for (double v : nll) rep.nll += v / b;
    const Eigen::ArrayXXd var = sigma.array().square();
    const Eigen::ArrayXXd kl = 0.5 * (enc.mu.array().square() + var - 1.0 - 2.0 * enc.log_sigma.array());
    rep.kl = kl.sum() / b;
    rep.program = rep.nll + opt.beta * rep.kl;
    rep.total += w.program * rep.program;
    if (grad != nullptr) {
      const double c = w.program * opt.beta / b;
      dmu += c * enc.mu;
      dls += (c * (var - 1.0)).matrix();
    }
  }

  if (w.latent != 0.0) {
    std::vector<const Rollout*> seqs;
    std::vector<int> owner;
    for (int j = 0; j < b; ++j) {
      if (batch[j].rollouts == nullptr) throw std::invalid_argument("latent loss needs rollouts");
      for (const Rollout& r : *batch[j].rollouts) {
        seqs.push_back(&r);
        owner.push_back(j);
      }
    }
    if (!seqs.empty()) {
      const double per = 1.0 / static_cast<double>(seqs.size());
      rep.latent = per * policy_pass(p, z, seqs, owner, w.latent * per, grad, &dz, &rep);
      rep.total += w.latent * rep.latent;
    }
  }

  if (w.behavior != 0.0) {
    std::vector<Decoded> sampled;
    if (opt.behavior_samples != nullptr) {
      sampled = *opt.behavior_samples;
    } else {
      if (rng == nullptr) throw std::invalid_argument("behavior loss needs an rng");
      sampled = decode_batch(p, z, DecodeMode::kSample, rng);
    }
    std::vector<std::vector<int>> targets;
    std::vector<const std::vector<TokenSet>*> masks;
    std::vector<double> weights;
    for (int j = 0; j < b; ++j) {
      if (batch[j].rollouts == nullptr || batch[j].program == nullptr) {
        throw std::invalid_argument("behavior loss needs rollouts and the reference program");
      }
      std::vector<GridState> inits;
      for (const Rollout& r : *batch[j].rollouts) inits.push_back(r.initial_state);
      const dsl::Program candidate = dsl::parse(sampled[j].tokens);
      const double reward = dsl::r_mat(candidate, *batch[j].program, inits, opt.exec_cap);
      rep.rewards.push_back(reward);
      targets.push_back(with_end(sampled[j].tokens));
      masks.push_back(&sampled[j].masks);
      weights.push_back(w.behavior * (reward - opt.baseline) / b);
    }
    const auto nll = decoder_pass(p, z, targets, masks, weights, grad, &dz, nullptr);
    for (int j = 0; j < b; ++j) rep.behavior += (rep.rewards[j] - opt.baseline) * nll[j] / b;
    rep.total += w.behavior * rep.behavior;
  }

  if (grad != nullptr) {
    dmu += dz;
    dls += (dz.array() * eps.array() * sigma.array()).matrix();
    encoder_backward(p, enc_pass, dmu, dls, *grad);
  }
  return rep;
}

LossReport policy_accuracy(const Params& params, const MatrixXd& z,
                           const std::vector<const std::vector<Rollout>*>& rollouts) {
  LossReport rep;
  std::vector<const Rollout*> seqs;
  std::vector<int> owner;
  for (size_t j = 0; j < rollouts.size(); ++j) {
    for (const Rollout& r : *rollouts[j]) {
      seqs.push_back(&r);
      owner.push_back(static_cast<int>(j));
    }
  }
  if (!seqs.empty()) rep.latent = policy_pass(params, z, seqs, owner, 0.0, nullptr, nullptr, &rep);
  return rep;
}

}  // namespace progsynth::embedding
