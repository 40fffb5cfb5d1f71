#ifndef UKIT_NN_TAPE_H_
#define UKIT_NN_TAPE_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ukit/nn/tensor.h"

namespace ukit::nn {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode autodiff tape. Nodes are appended in evaluation order, so the
// node vector is already a topological order and backward is a reverse sweep.
class Tape {
 public:
  // Receives the gradient flowing into the node's output and accumulates into
  // the gradients of its inputs. Entries of `input_grads` are null for inputs
  // that do not require gradients.
  using BackwardFn =
      std::function<void(const Tensor& output_grad, std::span<Tensor* const> input_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that receives a gradient.
  Var variable(Tensor value);
  // Leaf without gradient.
  Var constant(Tensor value);
  // Interior node. `backward` may be empty when no input requires a gradient.
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const;
  // Throws StateError until backward() has been run.
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be a one-element
  // node recorded on this tape.
  void backward(Var loss);
  bool has_gradients() const { return backward_done_; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace ukit::nn

#endif  // UKIT_NN_TAPE_H_
