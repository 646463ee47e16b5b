#include "topicaux/ntm/model.hpp"

#include <cmath>
#include <string>

#include "topicaux/common/error.hpp"

namespace topicaux::ntm {

using num::Matrix;
using num::Parameter;
using num::Var;

std::vector<Parameter*> ModelParams::trainable() {
  return {&enc_w, &enc_b, &mu_w, &mu_b, &lv_w, &lv_b, &beta, &prior_mean, &prior_logvar};
}

std::vector<const Parameter*> ModelParams::trainable() const {
  return {&enc_w, &enc_b, &mu_w, &mu_b, &lv_w, &lv_b, &beta, &prior_mean, &prior_logvar};
}

void ModelParams::zero_grad() {
  for (Parameter* p : trainable()) p->zero_grad();
}

std::pair<Matrix, Matrix> init_prior(std::size_t num_topics) {
  if (num_topics < 2) throw ConfigError("init_prior: need at least 2 topics");
  const double k = static_cast<double>(num_topics);
  // alpha = 1: var = (1/alpha)(1 - 2/K) + (1/K^2) * K/alpha = 1 - 1/K; mean = log(alpha) - mean(log alpha) = 0.
  return {Matrix(1, num_topics, 0.0), Matrix(1, num_topics, std::log(1.0 - 1.0 / k))};
}

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, num::RngStream& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (2.0 * rng.uniform() - 1.0) * bound;
  return m;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, num::RngStream& rng) {
  config.validate();
  const std::size_t in = config.input_dim(), H = config.hidden, K = config.num_topics, V = config.vocab_size;
  const double enc_bound = 1.0 / std::sqrt(static_cast<double>(in));
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(H));
  const double beta_bound = std::sqrt(6.0 / static_cast<double>(K + V));

  ModelParams p;
  p.enc_w = Parameter("enc_w", uniform_matrix(in, H, enc_bound, rng));
  p.enc_b = Parameter("enc_b", uniform_matrix(1, H, enc_bound, rng));
  p.mu_w = Parameter("mu_w", uniform_matrix(H, K, head_bound, rng));
  p.mu_b = Parameter("mu_b", uniform_matrix(1, K, head_bound, rng));
  p.lv_w = Parameter("lv_w", uniform_matrix(H, K, head_bound, rng));
  p.lv_b = Parameter("lv_b", uniform_matrix(1, K, head_bound, rng));
  p.beta = Parameter("beta", uniform_matrix(K, V, beta_bound, rng));
  auto [mean, logvar] = init_prior(K);
  p.prior_mean = Parameter("prior_mean", std::move(mean));
  p.prior_logvar = Parameter("prior_logvar", std::move(logvar));
  p.bn_mu = num::BatchNormState(K);
  p.bn_lv = num::BatchNormState(K);
  p.bn_dec = num::BatchNormState(V);
  return p;
}

Matrix make_input(std::span<const corpus::BowEntry> doc, std::span<const double> embedding,
                  const ModelConfig& config) {
  Matrix x(1, config.input_dim());
  if (config.input_mode != InputMode::bow && embedding.size() != config.embed_dim)
    throw DimensionError("document embedding has dimension " + std::to_string(embedding.size()) + ", expected " +
                         std::to_string(config.embed_dim));
  if (config.input_mode == InputMode::embedding) {
    std::copy(embedding.begin(), embedding.end(), x.data().begin());
    return x;
  }
  double total = 0.0;
  for (const auto& e : doc) {
    if (e.word >= config.vocab_size) throw DimensionError("word id outside the model vocabulary");
    total += e.count;
  }
  const double norm = config.input_mode == InputMode::concat && total > 0.0 ? 1.0 / total : 1.0;
  for (const auto& e : doc) x[e.word] = e.count * norm;
  if (config.input_mode == InputMode::concat)
    std::copy(embedding.begin(), embedding.end(), x.data().begin() + static_cast<std::ptrdiff_t>(config.vocab_size));
  return x;
}

Batch make_batch(const corpus::BowCorpus& corpus, const corpus::DocEmbeddings* embeddings,
                 std::span<const std::size_t> doc_ids, const ModelConfig& config) {
  if (corpus.vocab_size != config.vocab_size) throw DimensionError("corpus vocabulary does not match the model");
  const bool needs_emb = config.input_mode != InputMode::bow;
  if (needs_emb && (embeddings == nullptr || embeddings->num_docs() != corpus.num_docs()))
    throw DimensionError("input mode needs one document embedding per document");

  Batch b{Matrix(doc_ids.size(), config.vocab_size), Matrix(doc_ids.size(), config.input_dim())};
  for (std::size_t r = 0; r < doc_ids.size(); ++r) {
    const auto& doc = corpus.docs.at(doc_ids[r]);
    for (const auto& e : doc) b.bow(r, e.word) = e.count;
    const std::span<const double> emb = needs_emb ? embeddings->rows.row(doc_ids[r]) : std::span<const double>{};
    const Matrix x = make_input(doc, emb, config);
    std::copy(x.data().begin(), x.data().end(), b.input.row(r).begin());
  }
  return b;
}

BoundParams bind(num::Tape& tape, ModelParams& params) {
  return BoundParams{tape.parameter(params.enc_w),      tape.parameter(params.enc_b), tape.parameter(params.mu_w),
                     tape.parameter(params.mu_b),       tape.parameter(params.lv_w),  tape.parameter(params.lv_b),
                     tape.parameter(params.beta),       tape.parameter(params.prior_mean),
                     tape.parameter(params.prior_logvar)};
}

Encoded encode(const BoundParams& p, ModelParams& state, Var input, Mode mode, double dropout,
               num::RngStream& dropout_rng) {
  if (input.cols() != p.enc_w.rows())
    throw DimensionError("encoder input has " + std::to_string(input.cols()) + " columns, expected " +
                         std::to_string(p.enc_w.rows()));
  const bool training = mode == Mode::train;
  Var h = num::softplus(num::add_bias(num::matmul(input, p.enc_w), p.enc_b));
  h = num::dropout(h, dropout, dropout_rng, training);
  Var mu = num::batchnorm_1d(num::add_bias(num::matmul(h, p.mu_w), p.mu_b), state.bn_mu, training);
  Var logvar = num::batchnorm_1d(num::add_bias(num::matmul(h, p.lv_w), p.lv_b), state.bn_lv, training);
  return {mu, logvar};
}

Var reparameterize(Var mu, Var logvar, num::RngStream* noise) {
  if (noise == nullptr) return num::row_softmax(mu);
  Matrix eps(mu.rows(), mu.cols());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = noise->normal();
  Var z = num::add(mu, num::mul_const(num::exp(num::scale(logvar, 0.5)), eps));
  return num::row_softmax(z);
}

Var decode(const BoundParams& p, ModelParams& state, Var theta, Mode mode) {
  Var logits = num::batchnorm_1d(num::matmul(theta, p.beta), state.bn_dec, mode == Mode::train);
  return num::log_row_softmax(logits);
}

Var kl_divergence(const BoundParams& p, Var mu, Var logvar) {
  num::Tape& tape = mu.tape();
  const double batch = static_cast<double>(mu.rows());
  const double k = static_cast<double>(mu.cols());
  // 0.5 * sum_k [ var/pvar + (mu - pmean)^2 / pvar - 1 + log pvar - logvar ]
  Var var_ratio = num::exp(num::add_bias(logvar, num::scale(p.prior_logvar, -1.0)));
  Var diff = num::add_bias(mu, num::scale(p.prior_mean, -1.0));
  Var mahalanobis = num::mul_row(num::square(diff), num::exp(num::scale(p.prior_logvar, -1.0)));
  Var log_ratio = num::add_bias(num::scale(logvar, -1.0), p.prior_logvar);
  Var total = num::sum(num::add(num::add(var_ratio, mahalanobis), log_ratio));
  return num::add(num::scale(total, 0.5 / batch), tape.constant(Matrix::scalar(-0.5 * k)));
}

ElboTerms elbo(const BoundParams& p, ModelParams& state, const Batch& batch, Mode mode, double dropout,
               num::RngStream& dropout_rng, num::RngStream& noise_rng) {
  num::Tape& tape = p.beta.tape();
  Var input = tape.constant(batch.input);
  const auto [mu, logvar] = encode(p, state, input, mode, dropout, dropout_rng);
  Var theta = reparameterize(mu, logvar, mode == Mode::train ? &noise_rng : nullptr);
  Var log_probs = decode(p, state, theta, mode);
  const double inv_batch = 1.0 / static_cast<double>(batch.bow.rows());
  Var recon = num::scale(num::sum(num::mul_const(log_probs, batch.bow)), -inv_batch);
  Var kl = kl_divergence(p, mu, logvar);
  return {num::add(kl, recon), kl, recon};
}

Matrix infer_theta(ModelParams& params, const ModelConfig& config, const Matrix& inputs) {
  if (inputs.cols() != config.input_dim())
    throw DimensionError("infer_theta: input has " + std::to_string(inputs.cols()) + " columns, expected " +
                         std::to_string(config.input_dim()));
  num::Tape tape;
  const BoundParams p = bind(tape, params);
  num::RngStream unused;
  const auto [mu, logvar] = encode(p, params, tape.constant(inputs), Mode::eval, 0.0, unused);
  return reparameterize(mu, logvar, nullptr).value();
}

}  // namespace topicaux::ntm
