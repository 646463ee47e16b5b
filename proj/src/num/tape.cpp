#include "topicaux/num/tape.hpp"

#include "topicaux/common/error.hpp"

namespace topicaux::num {

const Matrix& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  return push(std::move(n));
}

Var Tape::detach(Var v) { return constant(v.value()); }

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw Error("Tape::record: input belongs to a different tape");
    n.requires_grad = n.requires_grad || nodes_[in.id_].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Matrix& Tape::accumulate(std::size_t id) {
  Node& n = nodes_[id];
  if (n.adjoint.empty()) n.adjoint = Matrix(n.value.rows(), n.value.cols());
  return n.adjoint;
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw Error("Tape::backward: loss belongs to a different tape");
  const Matrix& lv = nodes_[loss.id_].value;
  if (lv.rows() != 1 || lv.cols() != 1) throw DimensionError("Tape::backward: loss must be a 1x1 scalar");
  if (backward_done_) throw Error("Tape::backward: called twice on the same tape");
  backward_done_ = true;
  if (!nodes_[loss.id_].requires_grad) return;

  accumulate(loss.id_)[0] = 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.adjoint.empty() || !n.requires_grad) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param != nullptr) add_inplace(n.param->grad, n.adjoint);
  }
}

}  // namespace topicaux::num
