#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "topicaux/auxloss/config.hpp"
#include "topicaux/corpus/corpus.hpp"
#include "topicaux/corpus/embeddings.hpp"
#include "topicaux/corpus/npmi.hpp"
#include "topicaux/ntm/checkpoint.hpp"
#include "topicaux/ntm/model.hpp"
#include "topicaux/num/adam.hpp"

namespace topicaux::ntm {

/// Documents the trainer reads; not owned.
struct TrainingData {
  const corpus::BowCorpus* corpus = nullptr;
  const corpus::DocEmbeddings* embeddings = nullptr;  // needed unless input_mode == bow
};

struct StepObjective {
  num::Var loss;  // elbo + lambda * aux (aux only present when lambda > 0)
  double elbo = 0.0;
  double aux = 0.0;  // unscaled penalty, 0 without weights
};

/// Multitask objective of one minibatch. `aux_weights` are constants w.r.t.
/// beta; when null or lambda == 0 the aux term is not recorded at all.
StepObjective step_objective(const BoundParams& bound, ModelParams& params, const Batch& batch,
                             const ModelConfig& config, Mode mode, const num::Matrix* aux_weights, double lambda,
                             num::RngStream& dropout_rng, num::RngStream& noise_rng);

/// Minibatch ADAM training of the topic model, optionally with the
/// auxiliary coherence/diversity penalty. Serial and deterministic: the same
/// config, data and seed give bit-identical parameters.
class Trainer {
 public:
  /// Fresh model initialized from config.seed. `npmi` is required when `aux` is
  /// set and ignored otherwise.
  Trainer(const ModelConfig& config, std::optional<auxloss::AuxConfig> aux, TrainingData data,
          const corpus::NpmiMatrix* npmi);
  /// Continues from a saved state.
  Trainer(Checkpoint ckpt, TrainingData data, const corpus::NpmiMatrix* npmi);

  /// One pass over the shuffled corpus; the last batch may be short.
  EpochStats run_epoch();
  /// Runs epochs until config.epochs have been completed.
  void fit(const std::function<void(const EpochStats&)>& on_epoch = {});

  Checkpoint checkpoint() const;
  /// Words stored alongside the model in checkpoints.
  void set_vocabulary(std::vector<std::string> words) { vocabulary_ = std::move(words); }

  const ModelConfig& config() const { return config_; }
  const std::optional<auxloss::AuxConfig>& aux() const { return aux_; }
  const ModelParams& params() const { return params_; }
  std::size_t epoch() const { return epoch_; }
  const std::vector<EpochStats>& trace() const { return trace_; }

 private:
  void check_inputs() const;

  ModelConfig config_;
  std::optional<auxloss::AuxConfig> aux_;
  TrainingData data_;
  const corpus::NpmiMatrix* npmi_ = nullptr;
  ModelParams params_;
  num::Adam adam_;
  num::RngStream shuffle_rng_;
  num::RngStream dropout_rng_;
  num::RngStream noise_rng_;
  std::size_t epoch_ = 0;
  std::vector<EpochStats> trace_;
  std::vector<std::string> vocabulary_;
};

/// Stream ids derived from the seed.
inline constexpr std::uint64_t kInitStream = 0;
inline constexpr std::uint64_t kShuffleStream = 1;
inline constexpr std::uint64_t kDropoutStream = 2;
inline constexpr std::uint64_t kNoiseStream = 3;

}  // namespace topicaux::ntm
