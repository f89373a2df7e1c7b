// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "progsynth/embedding/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace progsynth::embedding {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'C', 'K'};
constexpr uint32_t kFormatVersion = 1;
constexpr int kVocab = dsl::kVocabSize;

GruParams gru_zeros(int in, int stat, int hidden) {
  return {MatrixXd::Zero(3 * hidden, in), MatrixXd::Zero(3 * hidden, stat), MatrixXd::Zero(3 * hidden, hidden),
          MatrixXd::Zero(3 * hidden, 1), MatrixXd::Zero(3 * hidden, 1)};
}

void fill_uniform(MatrixXd& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
}

void fill_normal(MatrixXd& m, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
}

template <class P, class F>
void visit_all(P& p, F&& fn) {
  fn("enc_embed", p.enc_embed);
  auto gru = [&](const std::string& prefix, auto& g) {
    fn(prefix + ".wx", g.wx);
    fn(prefix + ".ws", g.ws);
    fn(prefix + ".wh", g.wh);
    fn(prefix + ".bx", g.bx);
    fn(prefix + ".bh", g.bh);
  };
  gru("enc", p.enc);
  fn("mu_w", p.mu_w);
  fn("mu_b", p.mu_b);
  fn("logsig_w", p.logsig_w);
  fn("logsig_b", p.logsig_b);
  fn("dec_embed", p.dec_embed);
  fn("init_w", p.init_w);
  fn("init_b", p.init_b);
  gru("dec", p.dec);
  fn("out_w", p.out_w);
  fn("out_b", p.out_b);
  gru("pol", p.pol);
  fn("p1_w", p.p1_w);
  fn("p1_b", p.p1_b);
  fn("p2_w", p.p2_w);
  fn("p2_b", p.p2_b);
  fn("p3_w", p.p3_w);
  fn("p3_b", p.p3_b);
}

template <class T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("truncated checkpoint");
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const ModelDims& d) {
  j = {{"embed", d.embed}, {"hidden", d.hidden}, {"latent", d.latent}, {"policy_hidden", d.policy_hidden}};
}

void from_json(const nlohmann::json& j, ModelDims& d) {
  d.embed = j.value("embed", d.embed);
  d.hidden = j.value("hidden", d.hidden);
  d.latent = j.value("latent", d.latent);
  d.policy_hidden = j.value("policy_hidden", d.policy_hidden);
}

Params Params::zeros(const ModelDims& d) {
  if (d.embed <= 0 || d.hidden <= 0 || d.latent <= 0 || d.policy_hidden <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  Params p;
  p.dims = d;
  p.enc_embed = MatrixXd::Zero(d.embed, kVocab);
  p.enc = gru_zeros(d.embed, 0, d.hidden);
  p.mu_w = MatrixXd::Zero(d.latent, d.hidden);
  p.mu_b = MatrixXd::Zero(d.latent, 1);
  p.logsig_w = MatrixXd::Zero(d.latent, d.hidden);
  p.logsig_b = MatrixXd::Zero(d.latent, 1);
  p.dec_embed = MatrixXd::Zero(d.embed, kVocab);
  p.init_w = MatrixXd::Zero(d.hidden, d.latent);
  p.init_b = MatrixXd::Zero(d.hidden, 1);
  p.dec = gru_zeros(d.embed, d.latent, d.hidden);
  p.out_w = MatrixXd::Zero(kVocab, d.hidden);
  p.out_b = MatrixXd::Zero(kVocab, 1);
  p.pol = gru_zeros(kPolicyInputs, d.latent, d.policy_hidden);
  p.p1_w = MatrixXd::Zero(d.policy_hidden, d.policy_hidden);
  p.p1_b = MatrixXd::Zero(d.policy_hidden, 1);
  p.p2_w = MatrixXd::Zero(d.policy_hidden, d.policy_hidden);
  p.p2_b = MatrixXd::Zero(d.policy_hidden, 1);
  p.p3_w = MatrixXd::Zero(kNumActions, d.policy_hidden);
  p.p3_b = MatrixXd::Zero(kNumActions, 1);
  return p;
}

Params Params::init(const ModelDims& d, Rng& rng) {
  Params p = zeros(d);
  const double enc_bound = 1.0 / std::sqrt(static_cast<double>(d.hidden));
  const double pol_bound = 1.0 / std::sqrt(static_cast<double>(d.policy_hidden));
  fill_normal(p.enc_embed, rng);
  fill_normal(p.dec_embed, rng);
  for (GruParams* g : {&p.enc, &p.dec}) {
    fill_uniform(g->wx, enc_bound, rng);
    fill_uniform(g->ws, enc_bound, rng);
    fill_uniform(g->wh, enc_bound, rng);
    fill_uniform(g->bx, enc_bound, rng);
    fill_uniform(g->bh, enc_bound, rng);
  }
  fill_uniform(p.pol.wx, pol_bound, rng);
  fill_uniform(p.pol.ws, pol_bound, rng);
  fill_uniform(p.pol.wh, pol_bound, rng);
  fill_uniform(p.pol.bx, pol_bound, rng);
  fill_uniform(p.pol.bh, pol_bound, rng);
  for (MatrixXd* m : {&p.mu_w, &p.mu_b, &p.logsig_w, &p.logsig_b, &p.out_w, &p.out_b}) {
    fill_uniform(*m, enc_bound, rng);
  }
  const double lat_bound = 1.0 / std::sqrt(static_cast<double>(d.latent));
  fill_uniform(p.init_w, lat_bound, rng);
  fill_uniform(p.init_b, lat_bound, rng);
  for (MatrixXd* m : {&p.p1_w, &p.p1_b, &p.p2_w, &p.p2_b, &p.p3_w, &p.p3_b}) {
    fill_uniform(*m, pol_bound, rng);
  }
  return p;
}

void Params::visit(const std::function<void(const std::string&, MatrixXd&)>& fn) { visit_all(*this, fn); }

void Params::visit(const std::function<void(const std::string&, const MatrixXd&)>& fn) const {
  visit_all(*this, fn);
}

void Params::set_zero() {
  visit([](const std::string&, MatrixXd& m) { m.setZero(); });
}

size_t Params::size() const {
  size_t n = 0;
  visit([&](const std::string&, const MatrixXd& m) { n += static_cast<size_t>(m.size()); });
  return n;
}

void Params::add_scaled(const Params& other, double scale) {
  std::vector<const MatrixXd*> src;
  other.visit([&](const std::string&, const MatrixXd& m) { src.push_back(&m); });
  size_t i = 0;
  visit([&](const std::string&, MatrixXd& m) { m += scale * *src[i++]; });
}

double Params::squared_norm() const {
  double s = 0.0;
  visit([&](const std::string&, const MatrixXd& m) { s += m.squaredNorm(); });
  return s;
}

bool Params::all_finite() const {
  bool ok = true;
  visit([&](const std::string&, const MatrixXd& m) { ok = ok && m.allFinite(); });
  return ok;
}

void save_checkpoint(const Params& params, const nlohmann::json& meta, const std::filesystem::path& path) {
  nlohmann::json header = meta;
  header["dims"] = params.dims;
  std::vector<std::string> vocab;
  for (int i = 0; i < dsl::kVocabSize; ++i) vocab.emplace_back(dsl::token_text(dsl::token_at(i)));
  header["vocab"] = vocab;
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kMagic, 4);
  write_pod<uint32_t>(out, kFormatVersion);
  write_pod<uint64_t>(out, dsl::vocab_hash());
  write_pod<uint32_t>(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  params.visit([&](const std::string&, const MatrixXd& m) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(m.rows()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  });
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Params load_checkpoint(const std::filesystem::path& path, nlohmann::json* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw CheckpointError(path.string() + " is not a checkpoint");
  const auto version = read_pod<uint32_t>(in);
  if (version != kFormatVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  if (read_pod<uint64_t>(in) != dsl::vocab_hash()) throw CheckpointError("checkpoint vocabulary does not match");
  const auto len = read_pod<uint32_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw CheckpointError("truncated checkpoint header");
  const nlohmann::json header = nlohmann::json::parse(text);
  Params p = Params::zeros(header.at("dims").get<ModelDims>());
  p.visit([&](const std::string& name, MatrixXd& m) {
    const auto rows = read_pod<uint32_t>(in);
    const auto cols = read_pod<uint32_t>(in);
    if (rows != m.rows() || cols != m.cols()) throw CheckpointError("shape mismatch for " + name);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw CheckpointError("truncated tensor " + name);
  });
  if (meta != nullptr) *meta = header;
  return p;
}

uint64_t params_hash(const Params& params) {
  uint64_t h = fnv1a("");
  params.visit([&](const std::string&, const MatrixXd& m) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(double)), h);
  });
  return h;
}

}  // namespace progsynth::embedding
