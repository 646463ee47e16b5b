#include "topicaux/ntm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "topicaux/common/error.hpp"
#include "topicaux/num/ops.hpp"

#ifndef TOPICAUX_NO_AUX
#include "topicaux/auxloss/aux_loss.hpp"
#endif

// Compiled twice: with the auxiliary loss, and with TOPICAUX_NO_AUX defined
// (baseline-only build used to check that "--aux none" changes nothing).
namespace topicaux::ntm {

StepObjective step_objective(const BoundParams& bound, ModelParams& params, const Batch& batch,
                             const ModelConfig& config, Mode mode, const num::Matrix* aux_weights, double lambda,
                             num::RngStream& dropout_rng, num::RngStream& noise_rng) {
  const ElboTerms terms = elbo(bound, params, batch, mode, config.dropout, dropout_rng, noise_rng);
  StepObjective out{terms.loss, terms.loss.value()[0], 0.0};
#ifdef TOPICAUX_NO_AUX
  (void)lambda;
  if (aux_weights != nullptr) throw ConfigError("this build has no auxiliary loss");
#else
  if (aux_weights != nullptr) {
    out.aux = auxloss::aux_loss_value(params.beta.value, *aux_weights);
    if (lambda > 0.0) out.loss = num::add(out.loss, num::scale(auxloss::aux_loss(bound.beta, *aux_weights), lambda));
  }
#endif
  return out;
}

Trainer::Trainer(const ModelConfig& config, std::optional<auxloss::AuxConfig> aux, TrainingData data,
                 const corpus::NpmiMatrix* npmi)
    : config_(config),
      aux_(aux),
      data_(data),
      npmi_(npmi),
      adam_(num::AdamOptions{.lr = config.lr}),
      shuffle_rng_(config.seed, kShuffleStream),
      dropout_rng_(config.seed, kDropoutStream),
      noise_rng_(config.seed, kNoiseStream) {
  config_.validate();
  check_inputs();
  num::RngStream init_rng(config_.seed, kInitStream);
  params_ = init_params(config_, init_rng);
}

Trainer::Trainer(Checkpoint ckpt, TrainingData data, const corpus::NpmiMatrix* npmi)
    : config_(ckpt.config),
      aux_(ckpt.aux),
      data_(data),
      npmi_(npmi),
      params_(std::move(ckpt.params)),
      adam_(num::AdamOptions{.lr = ckpt.config.lr}),
      shuffle_rng_(ckpt.state.shuffle),
      dropout_rng_(ckpt.state.dropout),
      noise_rng_(ckpt.state.noise),
      epoch_(ckpt.state.epoch),
      trace_(std::move(ckpt.trace)),
      vocabulary_(std::move(ckpt.vocabulary)) {
  config_.validate();
  check_inputs();
  if (ckpt.state.adam_step > 0) adam_.restore(ckpt.state.adam_step, std::move(ckpt.state.adam_m), std::move(ckpt.state.adam_v));
}

void Trainer::check_inputs() const {
  if (data_.corpus == nullptr) throw ConfigError("trainer needs a corpus");
  if (data_.corpus->vocab_size != config_.vocab_size)
    throw DimensionError("corpus vocabulary size " + std::to_string(data_.corpus->vocab_size) +
                         " does not match the model (" + std::to_string(config_.vocab_size) + ")");
  if (data_.corpus->num_docs() == 0) throw ConfigError("training corpus has no documents");
  if (config_.input_mode != InputMode::bow) {
    if (data_.embeddings == nullptr) throw ConfigError("input mode needs document embeddings");
    if (data_.embeddings->dim != config_.embed_dim)
      throw DimensionError("document embeddings have dimension " + std::to_string(data_.embeddings->dim) +
                           ", model expects " + std::to_string(config_.embed_dim));
  }
  if (!aux_) return;
#ifdef TOPICAUX_NO_AUX
  throw ConfigError("this build has no auxiliary loss; train with aux=none");
#else
  aux_->validate(config_.vocab_size);
  if (npmi_ == nullptr) throw ConfigError("the auxiliary loss needs an NPMI matrix");
  if (npmi_->vocab_size() != config_.vocab_size)
    throw DimensionError("NPMI matrix is " + std::to_string(npmi_->vocab_size()) + "x" +
                         std::to_string(npmi_->vocab_size()) + " but V=" + std::to_string(config_.vocab_size));
#endif
}

EpochStats Trainer::run_epoch() {
  const corpus::BowCorpus& corpus = *data_.corpus;
  const std::size_t n_docs = corpus.num_docs();
  std::vector<std::size_t> order(n_docs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_rng_.shuffle(std::span<std::size_t>(order));

  EpochStats stats;
  stats.epoch = epoch_;
#ifndef TOPICAUX_NO_AUX
  if (aux_) stats.lambda_a = auxloss::lambda_schedule(epoch_, *aux_);
#endif

  const auto params = params_.trainable();
  double elbo_sum = 0.0, aux_sum = 0.0;
  std::size_t steps = 0;
  for (std::size_t start = 0; start < n_docs; start += config_.batch_size, ++steps) {
    const std::size_t end = std::min(n_docs, start + config_.batch_size);
    const std::span<const std::size_t> ids(order.data() + start, end - start);
    const Batch batch = make_batch(corpus, data_.embeddings, ids, config_);

    params_.zero_grad();
    num::Tape tape;
    const BoundParams bound = bind(tape, params_);
    const num::Matrix* weights = nullptr;
#ifndef TOPICAUX_NO_AUX
    auxloss::AuxWeights aux_weights;
    if (aux_) {
      aux_weights = auxloss::compute_weights(params_.beta.value, *npmi_, *aux_);
      weights = &aux_weights.active(aux_->mode);
    }
#endif
    const StepObjective obj = step_objective(bound, params_, batch, config_, Mode::train, weights,
                                             stats.lambda_a, dropout_rng_, noise_rng_);
    const double loss = obj.loss.value()[0];
    if (!std::isfinite(loss))
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch_) + ", step " + std::to_string(steps) +
                         " (elbo " + std::to_string(obj.elbo) + ", aux " + std::to_string(obj.aux) + ")");
    tape.backward(obj.loss);
    adam_.step(params);

    elbo_sum += obj.elbo * static_cast<double>(ids.size());
    aux_sum += obj.aux;
  }
  stats.elbo = elbo_sum / static_cast<double>(n_docs);
  stats.aux = aux_sum / static_cast<double>(steps);
  ++epoch_;
  trace_.push_back(stats);
  return stats;
}

void Trainer::fit(const std::function<void(const EpochStats&)>& on_epoch) {
  while (epoch_ < config_.epochs) {
    const EpochStats s = run_epoch();
    if (on_epoch) on_epoch(s);
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config = config_;
  c.aux = aux_;
  c.vocabulary = vocabulary_;
  c.params = params_;
  c.state.epoch = epoch_;
  c.state.adam_step = adam_.step_count();
  c.state.adam_m = adam_.first_moments();
  c.state.adam_v = adam_.second_moments();
  c.state.shuffle = shuffle_rng_;
  c.state.dropout = dropout_rng_;
  c.state.noise = noise_rng_;
  c.trace = trace_;
  return c;
}

}  // namespace topicaux::ntm
