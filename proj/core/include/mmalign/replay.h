#ifndef MMALIGN_REPLAY_H_
#define MMALIGN_REPLAY_H_

#include <vector>

#include "mmalign/loss.h"
#include "mmalign/tensor.h"

namespace mmalign {

// Hard-negative memory: for every entity (union row), the most similar
// entity of the other graph that is not its known counterpart, and the
// cosine similarity to it. neighbor[r] == -1 when no candidate exists.
struct MerpState {
  std::vector<int> neighbor;
  std::vector<Scalar> score;

  int size() const { return static_cast<int>(neighbor.size()); }
};

// Recomputes every row from the fused embeddings. `counterpart[r]` is the
// union row aligned with r by known seeds, or -1. Ties go to the lowest row.
MerpState RefreshMerp(const Tensor& fused, int num_kg1,
                      const std::vector<int>& counterpart);

// Adds each anchor's stored hard negative to its in-batch set.
NegativeSets ExpandNegatives(const Batch& batch, const NegativeSets& in_batch,
                             const MerpState& state);

}  // namespace mmalign

#endif  // MMALIGN_REPLAY_H_
