#include "topicaux/num/adam.hpp"

#include <cmath>

#include "topicaux/common/error.hpp"

namespace topicaux::num {

void Adam::step(std::span<Parameter* const> params) {
  if (m_.empty()) {
    for (const Parameter* p : params) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (m_.size() != params.size()) throw DimensionError("Adam::step: parameter list changed");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Parameter& p = *params[k];
    if (!p.grad.same_shape(p.value) || !m_[k].same_shape(p.value))
      throw DimensionError("Adam::step: gradient shape mismatch for " + p.name);
    if (!p.grad.all_finite()) throw NumericError("Adam::step: non-finite gradient for " + p.name);
  }

  ++step_;
  const auto& o = options_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Matrix& m = m_[k];
    Matrix& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p.value[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

void Adam::restore(std::uint64_t step, std::vector<Matrix> m, std::vector<Matrix> v) {
  if (m.size() != v.size()) throw DimensionError("Adam::restore: moment count mismatch");
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace topicaux::num
