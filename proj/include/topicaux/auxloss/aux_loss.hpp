#pragma once

#include <cstddef>

#include "topicaux/auxloss/config.hpp"
#include "topicaux/corpus/npmi.hpp"
#include "topicaux/num/matrix.hpp"
#include "topicaux/num/tape.hpp"

// Diversity-aware coherence penalty on the topic-word logits.
//
// Given beta (K x V) and a corpus NPMI matrix N (V x V):
//   M_c  top-n words of each topic
//   W_C  = 1 - rownorm(masked_softmax(beta, M_c) * N)
//   M_d  words in the top-n of some *other* topic
//   W_D  = lambda_d * M_d . W_C + (1 - lambda_d) * !M_d . W_C
//   L    = sum_{k,i} 1/2 * softmax(beta)[k,i]^2 * W[k,i]
// All masks and weights are constants with respect to beta.
namespace topicaux::auxloss {

struct AuxWeights {
  num::Matrix top_mask;        // M_c
  num::Matrix diversity_mask;  // M_d
  num::Matrix coherence;       // W_C
  num::Matrix diversity;       // W_D

  const num::Matrix& active(WeightMode mode) const { return mode == WeightMode::coherence ? coherence : diversity; }
};

/// 1 on the n largest entries of each row, ties broken by ascending column.
num::Matrix top_mask(const num::Matrix& beta, std::size_t n);
num::Matrix coherence_weight(const num::Matrix& beta, const num::Matrix& top_mask, const corpus::NpmiMatrix& npmi);
/// M_d[k,i] = 1 iff some other topic k' has M_c[k',i] = 1.
num::Matrix diversity_mask(const num::Matrix& top_mask);
num::Matrix diversity_weight(const num::Matrix& coherence, const num::Matrix& diversity_mask, double lambda_d);

/// All four matrices from the current beta. With mode == coherence the
/// diversity weight is still computed (it is cheap) so callers can log it.
AuxWeights compute_weights(const num::Matrix& beta, const corpus::NpmiMatrix& npmi, const AuxConfig& config);

/// Differentiable in beta only.
num::Var aux_loss(num::Var beta, const num::Matrix& weights);
double aux_loss_value(const num::Matrix& beta, const num::Matrix& weights);

/// dL/dbeta[k,i] = w_ki p_ki^2 (1 - p_ki) - p_ki * sum_{j != i} w_kj p_kj^2.
num::Matrix aux_grad_closed_form(const num::Matrix& beta, const num::Matrix& weights);

/// Linear warm-up: lambda_a_max * min(1, epoch / warmup_epochs).
double lambda_schedule(std::size_t epoch, const AuxConfig& config);

}  // namespace topicaux::auxloss
