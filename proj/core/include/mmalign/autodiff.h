#ifndef MMALIGN_AUTODIFF_H_
#define MMALIGN_AUTODIFF_H_

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "mmalign/tensor.h"

namespace mmalign {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid as long as the
// tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Computes input gradients from the output gradient. `input_grads` has one
// slot per input; a backward function fills the slots it can (leaving the
// others empty) and the tape accumulates them.
using BackwardFn = std::function<void(const Tensor& out_grad,
                                      std::vector<Tensor>& input_grads)>;

class Gradients {
 public:
  Gradients(const Tape* tape, std::vector<Tensor> grads)
      : tape_(tape), grads_(std::move(grads)) {}

  // Gradient of the loss with respect to `v`; zeros when `v` does not lie on
  // a path to the loss.
  const Tensor& operator[](const Var& v) const;

 private:
  const Tape* tape_;
  // Off-path slots are zero-filled on first lookup.
  mutable std::vector<Tensor> grads_;
};

// Ordered record of executed ops. Nodes are appended in execution order, so
// every op's inputs precede it and reverse iteration is a valid reverse
// topological order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Leaf(Tensor value, bool requires_grad = true);
  Var Constant(Tensor value) { return Leaf(std::move(value), false); }

  // Records an op result. The backward function is dropped when no input
  // requires gradients.
  Var Record(const std::string& op, Tensor value, std::vector<Var> inputs,
             BackwardFn backward);

  const Tensor& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  const std::string& op(int id) const { return nodes_[id].op; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Reverse-mode sweep from a scalar loss.
  Gradients Backward(const Var& loss) const;

 private:
  struct Node {
    std::string op;
    Tensor value;
    bool requires_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
  };
  // A deque keeps value() references valid while later ops are recorded.
  std::deque<Node> nodes_;
};

}  // namespace mmalign

#endif  // MMALIGN_AUTODIFF_H_
