#include "mmalign/encoders.h"

#include <algorithm>

#include "mmalign/ops.h"

namespace mmalign {

Adjacency Adjacency::FromGraphs(const std::vector<const Mmkg*>& kgs) {
  int total = 0;
  for (const Mmkg* kg : kgs) total += kg->num_entities();
  Adjacency adj(total);
  int offset = 0;
  for (const Mmkg* kg : kgs) {
    for (const RelTriple& t : kg->triples) {
      adj.AddEdge(offset + t.head, offset + t.tail);
    }
    offset += kg->num_entities();
  }
  adj.AddSelfLoops();
  return adj;
}

void Adjacency::AddEdge(int a, int b) {
  auto insert = [](std::vector<int>& v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  };
  if (a < 0 || b < 0 || a >= num_nodes() || b >= num_nodes()) {
    throw UsageError("adjacency: edge endpoint out of range");
  }
  insert(neighbors_[a], b);
  insert(neighbors_[b], a);
}

void Adjacency::AddSelfLoops() {
  for (int i = 0; i < num_nodes(); ++i) AddEdge(i, i);
}

bool Adjacency::HasEdge(int a, int b) const {
  const auto& v = neighbors_[a];
  return std::binary_search(v.begin(), v.end(), b);
}

Tensor Adjacency::AttentionMask() const {
  const int n = num_nodes();
  Tensor mask = Tensor::Full({n, n}, kMaskedLogit);
  for (int i = 0; i < n; ++i) {
    if (neighbors_[i].empty()) {
      throw DataError("adjacency: node " + std::to_string(i) +
                      " has no edges and no self-loop");
    }
    for (int j : neighbors_[i]) mask.at(i, j) = 0;
  }
  return mask;
}

namespace {

Var ProjectedAttention(const GatHead& head, Var mask, Var wh,
                       Scalar negative_slope) {
  using namespace ops;
  Var src = MatMul(wh, head.a_src);             // n x 1
  Var dst = Transpose(MatMul(wh, head.a_dst));  // 1 x n
  Var scores = LeakyRelu(Add(src, dst), negative_slope);
  return Softmax(Add(scores, mask));
}

Var HeadForward(const GatHead& head, Var mask, Var x, Scalar slope) {
  Var wh = ops::MatMul(x, head.weight);
  return ops::MatMul(ProjectedAttention(head, mask, wh, slope), wh);
}

}  // namespace

Var GatAttention(const GatHead& head, Var mask, Var x, Scalar negative_slope) {
  return ProjectedAttention(head, mask, ops::MatMul(x, head.weight),
                            negative_slope);
}

Var GatForward(const GatParams& params, Var mask, Var x) {
  using namespace ops;
  const Shape& ms = mask.shape();
  if (ms.size() != 2 || ms[0] != ms[1] || x.shape().size() != 2 ||
      ms[0] != x.shape()[0]) {
    throw ShapeError("gat", ms, x.shape());
  }
  const Scalar slope = params.negative_slope;
  Var h = Mul(x, params.diag);
  Var l1 = Elu(Concat({HeadForward(params.layers[0][0], mask, h, slope),
                       HeadForward(params.layers[0][1], mask, h, slope)}));
  Var l2 = Add(HeadForward(params.layers[1][0], mask, l1, slope),
               HeadForward(params.layers[1][1], mask, l1, slope));
  return Scale(l2, Scalar(0.5));
}

Var ModalityEncode(const LinearParams& params, Var x) {
  if (x.shape().size() != 2 || params.weight.shape().size() != 2 ||
      x.shape()[1] != params.weight.shape()[0]) {
    throw ShapeError("modality_encode", x.shape(), params.weight.shape());
  }
  return ops::Add(ops::MatMul(x, params.weight), params.bias);
}

}  // namespace mmalign
