#include "mmalign/autodiff.h"

namespace mmalign {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

const Tensor& Gradients::operator[](const Var& v) const {
  if (v.tape() != tape_) {
    throw Error(ErrorKind::kUsage, "gradient: variable from another tape");
  }
  Tensor& g = grads_[v.id()];
  if (g.empty()) g = Tensor::Zeros(v.shape());
  return g;
}

Var Tape::Leaf(Tensor value, bool requires_grad) {
  Node node;
  node.op = requires_grad ? "param" : "const";
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, size() - 1);
}

Var Tape::Record(const std::string& op, Tensor value, std::vector<Var> inputs,
                 BackwardFn backward) {
  if (!value.AllFinite()) {
    throw NumericalError(op + ": non-finite value in output of shape " +
                         ShapeString(value.shape()));
  }
  Node node;
  node.op = op;
  node.value = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape() != this) {
      throw Error(ErrorKind::kUsage, op + ": input recorded on another tape");
    }
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || in.requires_grad();
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, size() - 1);
}

namespace {

void Accumulate(Tensor& into, Tensor&& g) {
  if (into.empty()) {
    into = std::move(g);
    return;
  }
  if (into.shape() != g.shape()) {
    throw ShapeError("backward accumulate", into.shape(), g.shape());
  }
  auto dst = into.mutable_data();
  auto src = g.data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Gradients Tape::Backward(const Var& loss) const {
  if (loss.tape() != this) {
    throw Error(ErrorKind::kUsage, "backward: loss from another tape");
  }
  if (loss.value().size() != 1) {
    throw Error(ErrorKind::kShape, "backward: loss must be scalar, got shape " +
                                       ShapeString(loss.shape()));
  }
  std::vector<Tensor> grads(nodes_.size());
  grads[loss.id()] = Tensor::Full(loss.shape(), 1);
  std::vector<Tensor> input_grads;
  for (int id = loss.id(); id >= 0; --id) {
    const Node& node = nodes_[id];
    if (!node.backward || grads[id].empty()) continue;
    input_grads.assign(node.inputs.size(), Tensor());
    node.backward(grads[id], input_grads);
    for (size_t k = 0; k < node.inputs.size(); ++k) {
      const int in = node.inputs[k];
      if (input_grads[k].empty() || !nodes_[in].requires_grad) continue;
      Accumulate(grads[in], std::move(input_grads[k]));
    }
  }
  return Gradients(this, std::move(grads));
}

}  // namespace mmalign
