#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "topicaux/num/matrix.hpp"

namespace topicaux::num {

/// A trainable tensor together with its gradient accumulator.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Matrix value)
      : name(std::move(name)), value(std::move(value)), grad(this->value.rows(), this->value.cols()) {}

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }

  std::string name;
  Matrix value;
  Matrix grad;
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode recorder. Values are appended in execution order; backward()
/// walks them in exactly the reverse order and accumulates adjoints
/// additively. Nodes whose inputs all lack gradients (constants, detached
/// values) get no adjoint at all.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Registers a parameter; its grad receives the adjoint on backward().
  Var parameter(Parameter& p);
  /// Copy of v's value that is cut off from the gradient path.
  Var detach(Var v);

  /// Records the result of a primitive. `backward` is called with the node's
  /// id once its adjoint is complete and must add into the inputs' adjoints
  /// via accumulate(). It is dropped when no input requires a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);

  /// Propagates d(loss)/d(node) for every node and adds the result into the
  /// grad of each registered Parameter. loss must be 1 x 1.
  void backward(Var loss);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Adjoint of a node after backward(); empty when the node received none.
  const Matrix& adjoint(std::size_t id) const { return nodes_[id].adjoint; }
  /// Adjoint buffer of an input node, zero-initialized on first use.
  Matrix& accumulate(std::size_t id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix adjoint;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace topicaux::num
