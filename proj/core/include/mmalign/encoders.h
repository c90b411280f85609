#ifndef MMALIGN_ENCODERS_H_
#define MMALIGN_ENCODERS_H_

#include <array>
#include <vector>

#include "mmalign/autodiff.h"
#include "mmalign/kg.h"

namespace mmalign {

// Logit added to non-edges before the neighbourhood softmax. exp() of it
// underflows to exactly zero while staying finite.
inline constexpr Scalar kMaskedLogit = Scalar(-1e30);

// Undirected neighbourhoods with self-loops, over one or more graphs laid
// out as consecutive row blocks.
class Adjacency {
 public:
  explicit Adjacency(int num_nodes) : neighbors_(num_nodes) {}

  // Disjoint union of the graphs' triple structure; graph k's entities
  // occupy rows [offset_k, offset_k + |E_k|). Self-loops are added.
  static Adjacency FromGraphs(const std::vector<const Mmkg*>& kgs);

  void AddEdge(int a, int b);
  void AddSelfLoops();

  int num_nodes() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  bool HasEdge(int a, int b) const;

  // num_nodes x num_nodes: 0 where an edge exists, kMaskedLogit elsewhere.
  // Errors when some node has no edge at all.
  Tensor AttentionMask() const;

 private:
  std::vector<std::vector<int>> neighbors_;  // sorted, unique
};

// One attention head: linear map plus source/destination scoring vectors.
struct GatHead {
  Var weight;  // d_in x d_out
  Var a_src;   // d_out x 1
  Var a_dst;   // d_out x 1
};

struct GatParams {
  Var diag;  // [d]; diagonal transform applied to the input embeddings
  std::array<std::array<GatHead, 2>, 2> layers;  // [layer][head]
  Scalar negative_slope = Scalar(0.2);
};

// Two-layer graph attention over `x` (rows = nodes). Heads are concatenated
// after layer 1 (followed by ELU) and averaged after layer 2. `mask` comes
// from Adjacency::AttentionMask.
Var GatForward(const GatParams& params, Var mask, Var x);

// Node-to-neighbour attention of one head, exposed for inspection.
Var GatAttention(const GatHead& head, Var mask, Var x, Scalar negative_slope);

struct LinearParams {
  Var weight;  // d_in x d_out
  Var bias;    // 1 x d_out
};

// h = x W + b. No activation.
Var ModalityEncode(const LinearParams& params, Var x);

}  // namespace mmalign

#endif  // MMALIGN_ENCODERS_H_
