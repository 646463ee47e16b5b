#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "topicaux/common/error.hpp"

namespace topicaux::auxloss {

/// Which weight drives the penalty: W_C (coherence only) or W_D
/// (coherence rebalanced toward words unused by other topics).
enum class WeightMode { coherence, diversity };

inline std::string_view to_string(WeightMode mode) { return mode == WeightMode::coherence ? "wc" : "wd"; }

inline WeightMode parse_weight_mode(std::string_view s) {
  if (s == "wc") return WeightMode::coherence;
  if (s == "wd") return WeightMode::diversity;
  throw ConfigError("unknown auxiliary weight mode '" + std::string(s) + "' (expected wc or wd)");
}

struct AuxConfig {
  std::size_t top_n = 20;
  double lambda_d = 0.7;
  double lambda_a_max = 100.0;
  std::size_t warmup_epochs = 50;
  WeightMode mode = WeightMode::diversity;

  void validate(std::size_t vocab_size) const {
    if (top_n < 1 || top_n > vocab_size)
      throw ConfigError("aux top_n must lie in [1, V=" + std::to_string(vocab_size) + "]");
    if (!(lambda_d >= 0.5 && lambda_d <= 1.0)) throw ConfigError("lambda_d must lie in [0.5, 1]");
    if (!(lambda_a_max >= 0.0) || !std::isfinite(lambda_a_max)) throw ConfigError("lambda_a must be finite and >= 0");
  }

  friend bool operator==(const AuxConfig&, const AuxConfig&) = default;
};

}  // namespace topicaux::auxloss
