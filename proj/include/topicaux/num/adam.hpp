#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topicaux/num/matrix.hpp"
#include "topicaux/num/tape.hpp"

namespace topicaux::num {

struct AdamOptions {
  double lr = 0.002;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// ADAM with bias correction. Moment buffers are bound to parameters by
/// position, so step() must always receive the same parameter list.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  /// Applies one update using each parameter's grad. Throws NumericError if
  /// any gradient is NaN/Inf, before touching any parameter.
  void step(std::span<Parameter* const> params);

  const AdamOptions& options() const { return options_; }
  std::uint64_t step_count() const { return step_; }

  // Exposed for checkpointing.
  std::vector<Matrix>& first_moments() { return m_; }
  std::vector<Matrix>& second_moments() { return v_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  void restore(std::uint64_t step, std::vector<Matrix> m, std::vector<Matrix> v);

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace topicaux::num
