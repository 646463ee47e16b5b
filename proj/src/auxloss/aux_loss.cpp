#include "topicaux/auxloss/aux_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "topicaux/common/error.hpp"
#include "topicaux/num/ops.hpp"

namespace topicaux::auxloss {

using num::Matrix;

Matrix top_mask(const Matrix& beta, std::size_t n) {
  const std::size_t K = beta.rows(), V = beta.cols();
  if (n > V) throw DimensionError("top_mask: n exceeds vocabulary size");
  Matrix mask(K, V);
  std::vector<std::size_t> order(V);
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = beta.row(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
    for (std::size_t r = 0; r < n; ++r) mask(k, order[r]) = 1.0;
  }
  return mask;
}

Matrix coherence_weight(const Matrix& beta, const Matrix& top_mask, const corpus::NpmiMatrix& npmi) {
  const std::size_t K = beta.rows(), V = beta.cols();
  if (!beta.same_shape(top_mask) || npmi.vocab_size() != V)
    throw DimensionError("coherence_weight: beta, mask and NPMI shapes disagree");

  num::Tape tape;
  const Matrix weights = num::masked_row_softmax(tape.constant(beta), top_mask).value();

  // weights has n nonzeros per row, so accumulate rows of N instead of a dense product.
  Matrix avg(K, V);
  for (std::size_t k = 0; k < K; ++k) {
    auto out = avg.row(k);
    for (std::size_t j = 0; j < V; ++j) {
      const double w = weights(k, j);
      if (w == 0.0) continue;
      const auto nrow = npmi.row(j);
      for (std::size_t i = 0; i < V; ++i) out[i] += w * static_cast<double>(nrow[i]);
    }
  }

  Matrix wc = num::row_minmax_normalize(tape.constant(std::move(avg))).value();
  for (std::size_t i = 0; i < wc.size(); ++i) wc[i] = 1.0 - wc[i];
  return wc;
}

Matrix diversity_mask(const Matrix& top_mask) {
  const std::size_t K = top_mask.rows(), V = top_mask.cols();
  std::vector<std::size_t> holders(V, 0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < V; ++i)
      if (top_mask(k, i) != 0.0) ++holders[i];
  Matrix md(K, V);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < V; ++i) {
      const std::size_t others = holders[i] - (top_mask(k, i) != 0.0 ? 1 : 0);
      md(k, i) = others > 0 ? 1.0 : 0.0;
    }
  return md;
}

Matrix diversity_weight(const Matrix& coherence, const Matrix& diversity_mask, double lambda_d) {
  if (!(lambda_d >= 0.5 && lambda_d <= 1.0)) throw ConfigError("lambda_d must lie in [0.5, 1]");
  if (!coherence.same_shape(diversity_mask)) throw DimensionError("diversity_weight: shape mismatch");
  Matrix wd(coherence.rows(), coherence.cols());
  for (std::size_t i = 0; i < wd.size(); ++i)
    wd[i] = (diversity_mask[i] != 0.0 ? lambda_d : 1.0 - lambda_d) * coherence[i];
  return wd;
}

AuxWeights compute_weights(const Matrix& beta, const corpus::NpmiMatrix& npmi, const AuxConfig& config) {
  AuxWeights w;
  w.top_mask = top_mask(beta, config.top_n);
  w.diversity_mask = diversity_mask(w.top_mask);
  w.coherence = coherence_weight(beta, w.top_mask, npmi);
  w.diversity = diversity_weight(w.coherence, w.diversity_mask, config.lambda_d);
  return w;
}

num::Var aux_loss(num::Var beta, const Matrix& weights) {
  if (!beta.value().same_shape(weights)) throw DimensionError("aux_loss: weight shape mismatch");
  return num::scale(num::sum(num::mul_const(num::square(num::row_softmax(beta)), weights)), 0.5);
}

double aux_loss_value(const Matrix& beta, const Matrix& weights) {
  num::Tape tape;
  return aux_loss(tape.constant(beta), weights).value()[0];
}

Matrix aux_grad_closed_form(const Matrix& beta, const Matrix& weights) {
  if (!beta.same_shape(weights)) throw DimensionError("aux_grad_closed_form: weight shape mismatch");
  const std::size_t K = beta.rows(), V = beta.cols();
  Matrix grad(K, V);
  std::vector<double> p(V);
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = beta.row(k);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t i = 0; i < V; ++i) z += (p[i] = std::exp(row[i] - m));
    for (double& v : p) v /= z;
    double total = 0.0;  // sum_j w_kj p_kj^2
    for (std::size_t j = 0; j < V; ++j) total += weights(k, j) * p[j] * p[j];
    for (std::size_t i = 0; i < V; ++i) {
      const double own = weights(k, i) * p[i] * p[i];
      grad(k, i) = own * (1.0 - p[i]) - p[i] * (total - own);
    }
  }
  return grad;
}

double lambda_schedule(std::size_t epoch, const AuxConfig& config) {
  if (config.warmup_epochs == 0) return config.lambda_a_max;
  const double frac = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(config.warmup_epochs));
  return config.lambda_a_max * frac;
}

}  // namespace topicaux::auxloss
