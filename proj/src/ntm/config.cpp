#include "topicaux/ntm/config.hpp"

#include <cmath>
#include <string>

#include "topicaux/common/error.hpp"

namespace topicaux::ntm {

std::string_view to_string(InputMode mode) {
  switch (mode) {
    case InputMode::bow: return "bow";
    case InputMode::embedding: return "embedding";
    case InputMode::concat: return "concat";
  }
  return "bow";
}

InputMode parse_input_mode(std::string_view s) {
  if (s == "bow") return InputMode::bow;
  if (s == "embedding") return InputMode::embedding;
  if (s == "concat") return InputMode::concat;
  throw ConfigError("unknown input mode '" + std::string(s) + "' (expected bow, embedding or concat)");
}

void ModelConfig::validate() const {
  if (num_topics < 2) throw ConfigError("number of topics must be >= 2");
  if (vocab_size < 2) throw ConfigError("vocabulary size must be >= 2");
  if (hidden < 1) throw ConfigError("hidden size must be >= 1");
  if (input_mode == InputMode::bow && embed_dim != 0) throw ConfigError("bow input mode takes no embedding dimension");
  if (input_mode != InputMode::bow && embed_dim == 0)
    throw ConfigError("embedding and concat input modes need embed_dim > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
}

std::size_t ModelConfig::input_dim() const {
  switch (input_mode) {
    case InputMode::bow: return vocab_size;
    case InputMode::embedding: return embed_dim;
    case InputMode::concat: return vocab_size + embed_dim;
  }
  return vocab_size;
}

}  // namespace topicaux::ntm
