#ifndef MMALIGN_MMH_H_
#define MMALIGN_MMH_H_

#include <vector>

#include "mmalign/autodiff.h"

// Meta modality hybrid: attention across one entity's modality embeddings,
// per-entity modality weights derived from it, and weighted fusion.
//
// All functions are batched over entities: every modality embedding is an
// [entities x d] matrix and row i of every output belongs to entity i.
// Modalities appear in a fixed canonical order throughout.
namespace mmalign {

struct MhcaParams {
  std::vector<Var> query;  // per head, d x d_h
  std::vector<Var> key;    // per head, d x d_h
  std::vector<Var> value;  // per head, d x d_h
  Var output;              // d x d
  Var ln_gain;             // [d], shared across modalities
  Var ln_bias;             // [d]

  int num_heads() const { return static_cast<int>(query.size()); }
};

struct FfnParams {
  Var w1;  // d x d_in
  Var b1;  // 1 x d_in
  Var w2;  // d_in x d
  Var b2;  // 1 x d
  Var ln_gain;
  Var ln_bias;
  bool enabled = false;
};

struct MhcaResult {
  std::vector<Var> attended;  // per modality, entities x d
  // beta[head][m] is entities x |M|: row i holds entity i's attention from
  // query modality m over every key modality.
  std::vector<std::vector<Var>> beta;
};

// For each head: beta_mj = softmax_j(Q_m . K_j / sqrt(d_h)), head output
// sum_j beta_mj V_j; heads are concatenated and projected, then
// attended_m = LayerNorm(projected_m + h_m).
MhcaResult MhcaForward(const MhcaParams& params, const std::vector<Var>& h);

// attended <- LayerNorm(ReLU(attended W1 + b1) W2 + b2 + attended).
Var FfnForward(const FfnParams& params, Var attended);

// Meta weights, entities x |M|. Modality m scores the attention it receives,
// s_m = sum_heads sum_queries beta[head][query][m] / sqrt(|M| * heads), and
// the weights are softmax_m(s). Errors when a beta row is not normalized.
Var MetaWeights(const std::vector<std::vector<Var>>& beta);

struct Fusion {
  Var early;  // concat_m w_m h_m
  Var late;   // concat_m w_m attended_m
};

Fusion Fuse(Var weights, const std::vector<Var>& h,
            const std::vector<Var>& attended);

}  // namespace mmalign

#endif  // MMALIGN_MMH_H_
