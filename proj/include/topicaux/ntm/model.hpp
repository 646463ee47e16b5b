#pragma once

#include <span>
#include <utility>
#include <vector>

#include "topicaux/corpus/corpus.hpp"
#include "topicaux/corpus/embeddings.hpp"
#include "topicaux/ntm/config.hpp"
#include "topicaux/num/ops.hpp"
#include "topicaux/num/rng.hpp"
#include "topicaux/num/tape.hpp"

namespace topicaux::ntm {

/// Trainable tensors and batch-norm state of the VAE topic model.
///
///   encoder:  h = softplus(x W_enc + b_enc), dropout(h)
///             mu = BN(h W_mu + b_mu), logvar = BN(h W_lv + b_lv)
///   latent:   theta = softmax(mu + exp(logvar / 2) * eps)
///   decoder:  log p(w | theta) = log_softmax(BN(theta beta))
///   prior:    N(prior_mean, exp(prior_logvar)), both learnable
struct ModelParams {
  num::Parameter enc_w;         // input_dim x hidden
  num::Parameter enc_b;         // 1 x hidden
  num::Parameter mu_w;          // hidden x K
  num::Parameter mu_b;          // 1 x K
  num::Parameter lv_w;          // hidden x K
  num::Parameter lv_b;          // 1 x K
  num::Parameter beta;          // K x V topic-word logits
  num::Parameter prior_mean;    // 1 x K
  num::Parameter prior_logvar;  // 1 x K
  num::BatchNormState bn_mu;
  num::BatchNormState bn_lv;
  num::BatchNormState bn_dec;

  /// Stable order used by the optimizer and the checkpoint format.
  std::vector<num::Parameter*> trainable();
  std::vector<const num::Parameter*> trainable() const;
  void zero_grad();
};

/// Laplace approximation of a symmetric Dirichlet(1) prior in softmax basis:
/// mean 0 and variance 1 - 1/K per coordinate. Returns (mean, logvar) rows.
std::pair<num::Matrix, num::Matrix> init_prior(std::size_t num_topics);

/// Uniform(+-1/sqrt(fan_in)) for linear layers, Xavier-uniform for beta.
ModelParams init_params(const ModelConfig& config, num::RngStream& rng);

enum class Mode { train, eval };

/// BoW counts and encoder input of one minibatch.
struct Batch {
  num::Matrix bow;    // B x V
  num::Matrix input;  // B x input_dim
};

/// Gathers `doc_ids` into a dense batch laid out for config.input_mode.
Batch make_batch(const corpus::BowCorpus& corpus, const corpus::DocEmbeddings* embeddings,
                 std::span<const std::size_t> doc_ids, const ModelConfig& config);
/// Encoder input for a single document.
num::Matrix make_input(std::span<const corpus::BowEntry> doc, std::span<const double> embedding,
                       const ModelConfig& config);

/// Every parameter registered once on a tape.
struct BoundParams {
  num::Var enc_w, enc_b, mu_w, mu_b, lv_w, lv_b, beta, prior_mean, prior_logvar;
};
BoundParams bind(num::Tape& tape, ModelParams& params);

struct Encoded {
  num::Var mu;
  num::Var logvar;
};

/// `dropout_rng` is only read in train mode.
Encoded encode(const BoundParams& p, ModelParams& state, num::Var input, Mode mode, double dropout,
               num::RngStream& dropout_rng);

/// theta = softmax(mu + exp(logvar/2) * eps) with eps ~ N(0, I) from `noise`,
/// or eps = 0 when `noise` is null.
num::Var reparameterize(num::Var mu, num::Var logvar, num::RngStream* noise);

/// Log-probabilities over the vocabulary, B x V.
num::Var decode(const BoundParams& p, ModelParams& state, num::Var theta, Mode mode);

/// Batch-mean KL(q(z|x) || prior) in closed form for diagonal Gaussians.
num::Var kl_divergence(const BoundParams& p, num::Var mu, num::Var logvar);

struct ElboTerms {
  num::Var loss;   // kl + recon
  num::Var kl;     // batch mean, summed over K
  num::Var recon;  // batch mean of -sum_i x_i log p_i
};

/// Negative ELBO of a batch (minimized). In train mode dropout and noise are
/// drawn from the given streams in that order; eval mode uses eps = 0.
ElboTerms elbo(const BoundParams& p, ModelParams& state, const Batch& batch, Mode mode, double dropout,
               num::RngStream& dropout_rng, num::RngStream& noise_rng);

/// Eval-mode document-topic proportions for encoder inputs (rows).
num::Matrix infer_theta(ModelParams& params, const ModelConfig& config, const num::Matrix& inputs);

}  // namespace topicaux::ntm
