#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topicaux/auxloss/config.hpp"
#include "topicaux/ntm/config.hpp"
#include "topicaux/ntm/model.hpp"
#include "topicaux/num/matrix.hpp"
#include "topicaux/num/rng.hpp"

namespace topicaux::ntm {

/// One row of the loss trace. `elbo` and `aux` are means over the epoch's
/// minibatches; `aux` is the unscaled penalty (0 when the aux term is off).
struct EpochStats {
  std::size_t epoch = 0;
  double elbo = 0.0;
  double aux = 0.0;
  double lambda_a = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

/// Everything needed to continue training exactly where it stopped.
struct TrainingState {
  std::size_t epoch = 0;  // completed epochs
  std::uint64_t adam_step = 0;
  std::vector<num::Matrix> adam_m;
  std::vector<num::Matrix> adam_v;
  num::RngStream shuffle;
  num::RngStream dropout;
  num::RngStream noise;
};

struct Checkpoint {
  ModelConfig config;
  std::optional<auxloss::AuxConfig> aux;  // nullopt: baseline objective
  std::vector<std::string> vocabulary;    // may be empty
  ModelParams params;
  TrainingState state;
  std::vector<EpochStats> trace;
};

/// Layout:
///   text header, one `key=value` per line, starting with
///   "TOPICAUX-CHECKPOINT 1" and ending with "END"; the vocabulary and the
///   loss trace are text sections inside the header.
///   then for each tensor: "array <name> f64 <rows> <cols>\n" followed by
///   rows*cols little-endian doubles, row-major.
/// Tensor order: the trainable parameters, the three batch-norm states
/// (running mean, running var), then the ADAM moments when adam_step > 0.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace topicaux::ntm
