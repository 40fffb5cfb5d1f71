#include "ukit/nn/tape.h"

#include "ukit/errors.h"

namespace ukit::nn {

const Tensor& Var::value() const {
  if (!tape_) throw StateError("use of an unbound Var");
  return tape_->value(*this);
}

Var Tape::variable(Tensor value) {
  Node n;
  n.grad = Tensor(value.shape());
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  backward_done_ = false;
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) {
    if (in.tape() != this) throw StateError("input recorded on a different tape");
    n.inputs.push_back(in.id());
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) {
    if (!backward) throw StateError("differentiable node without a backward rule");
    n.grad = Tensor(n.value.shape());
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  backward_done_ = false;
  return Var(this, nodes_.size() - 1);
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape() != this || v.id() >= nodes_.size()) {
    throw StateError("Var does not belong to this tape");
  }
  return nodes_[v.id()];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!backward_done_) throw StateError("gradient requested before backward()");
  if (!n.requires_grad) throw StateError("node does not require a gradient");
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::backward(Var loss) {
  const Node& root = node(loss);
  if (root.value.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     shape_string(root.value.shape()));
  }
  for (Node& n : nodes_) {
    if (n.requires_grad) n.grad.fill(0.0);
  }
  backward_done_ = true;
  if (!root.requires_grad) return;
  nodes_[loss.id()].grad[0] = 1.0;

  std::vector<Tensor*> input_grads;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward) continue;
    input_grads.clear();
    for (std::size_t in : n.inputs) {
      input_grads.push_back(nodes_[in].requires_grad ? &nodes_[in].grad : nullptr);
    }
    n.backward(n.grad, input_grads);
  }
}

}  // namespace ukit::nn
