#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace topicaux::ntm {

/// What the encoder sees: BoW counts, a document embedding, or both
/// (L1-normalized BoW followed by the embedding).
enum class InputMode { bow, embedding, concat };

std::string_view to_string(InputMode mode);
InputMode parse_input_mode(std::string_view s);

/// Architecture and optimization settings; defaults follow the reference
/// ProdLDA setup (one softplus hidden layer of 100 units, 20% dropout,
/// 100 epochs, batches of 100, ADAM at lr 0.002).
struct ModelConfig {
  std::size_t num_topics = 0;
  std::size_t vocab_size = 0;
  std::size_t hidden = 100;
  InputMode input_mode = InputMode::bow;
  std::size_t embed_dim = 0;
  double dropout = 0.2;
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  double lr = 0.002;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t input_dim() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace topicaux::ntm
