#ifndef MMALIGN_LOSS_H_
#define MMALIGN_LOSS_H_

#include <span>
#include <utility>
#include <vector>

#include "mmalign/autodiff.h"
#include "mmalign/model.h"

namespace mmalign {

struct LossConfig {
  Scalar temperature = Scalar(0.1);
  bool use_licl = true;     // late intra-modal terms over attended embeddings
  bool use_late = false;    // extra term over the late-fusion embedding
  bool use_merp = false;    // hard-negative replay on the fused term
  bool normalize = true;    // l2-normalize before every similarity

  void Validate() const;
};

// Probability that `anchor` picks `positive` over `negatives`:
// g(a,p) / (g(a,p) + sum_n g(a,n)), g(x,y) = exp(x.y / tau).
Scalar AlignmentProbability(std::span<const Scalar> anchor,
                            std::span<const Scalar> positive,
                            const std::vector<std::span<const Scalar>>& negatives,
                            Scalar temperature);

// A mini-batch of aligned pairs as row indices into the union embedding
// matrix (KG1 row, KG2 row).
using Batch = std::vector<std::pair<int, int>>;

// Per-anchor negative row sets for both directions. forward[i] belongs to the
// KG1 anchor of pair i, backward[i] to its KG2 anchor. Sets are sorted and
// never contain the anchor or its positive.
struct NegativeSets {
  std::vector<std::vector<int>> forward;
  std::vector<std::vector<int>> backward;
};

// In-batch negatives: every other entity of the batch, on either side.
NegativeSets InBatchNegatives(const Batch& batch);

struct ContrastiveResult {
  Var loss;
  int clamped = 0;  // probabilities floored at kMinProbability
};

inline constexpr Scalar kMinProbability = Scalar(1e-12);

// Bidirectional objective over one embedding matrix:
//   mean_i  -1/2 (log p(e1_i -> e2_i) + log p(e2_i -> e1_i)).
ContrastiveResult ContrastiveLoss(Var embeddings, const Batch& batch,
                                  const NegativeSets& negatives,
                                  Scalar temperature, bool normalize);

struct LossBreakdown {
  Var total;
  Scalar fused = 0;      // early-fusion term
  Scalar intra = 0;      // sum over modalities, pre-attention
  Scalar late_intra = 0; // sum over modalities, post-attention
  Scalar late = 0;       // late-fusion term (when enabled)
  int clamped = 0;
};

// fused + intra (+ late_intra) (+ late). `fused_negatives` (e.g. expanded by
// hard-negative replay) apply to the fused term only; every other term uses
// in-batch negatives.
LossBreakdown TotalLoss(const ModelOutput& out, const Batch& batch,
                        const LossConfig& cfg,
                        const NegativeSets* fused_negatives = nullptr);

}  // namespace mmalign

#endif  // MMALIGN_LOSS_H_
