#pragma once

#include "topicaux/num/matrix.hpp"
#include "topicaux/num/rng.hpp"
#include "topicaux/num/tape.hpp"

// Differentiable primitives. Each records its forward value on the tape of
// its first argument together with the adjoint rule.
namespace topicaux::num {

Var matmul(Var a, Var b);
/// x (B x C) plus a 1 x C row broadcast over rows.
Var add_bias(Var x, Var bias);
/// x (B x C) times a 1 x C row broadcast over rows.
Var mul_row(Var x, Var row);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// Elementwise product with a constant matrix (no adjoint for the constant).
Var mul_const(Var a, const Matrix& c);

Var square(Var a);
Var exp(Var a);
Var log(Var a);
Var softplus(Var a);

Var row_softmax(Var a);
Var log_row_softmax(Var a);
/// Softmax over the unmasked entries of each row (mask != 0). Masked entries
/// get weight exactly 0; a fully masked row is all zeros.
Var masked_row_softmax(Var a, const Matrix& mask);
/// Per-row (x - min) / (max - min). Rows whose range is below `eps` map to 0.
Var row_minmax_normalize(Var a, double eps = 1e-12);

/// Inverted dropout: kept entries are scaled by 1/(1-p). Identity when
/// !training or p == 0.
Var dropout(Var a, double p, RngStream& rng, bool training);

/// Per-feature standardization state for batchnorm_1d (no affine terms).
struct BatchNormState {
  BatchNormState() = default;
  explicit BatchNormState(std::size_t features)
      : running_mean(1, features, 0.0), running_var(1, features, 1.0) {}

  Matrix running_mean;
  Matrix running_var;
  double momentum = 0.1;
  double eps = 1e-8;
};

/// True when batch statistics are unusable: a single row or all rows equal.
bool is_degenerate_batch(const Matrix& x);

/// Training mode standardizes with batch statistics (biased variance) and
/// updates the running statistics (unbiased variance). Eval mode and
/// degenerate batches use the running statistics and leave them untouched.
Var batchnorm_1d(Var x, BatchNormState& state, bool training);

Var sum(Var a);
/// B x C -> B x 1.
Var row_sum(Var a);
Var mean(Var a);

}  // namespace topicaux::num
