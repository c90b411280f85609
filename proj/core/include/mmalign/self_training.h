#ifndef MMALIGN_SELF_TRAINING_H_
#define MMALIGN_SELF_TRAINING_H_

#include <map>
#include <utility>
#include <vector>

#include "mmalign/features.h"
#include "mmalign/kg.h"
#include "mmalign/tensor.h"

namespace mmalign {

using EntityPair = std::pair<int, int>;  // (KG1 index, KG2 index)

// Cross-graph mutual nearest neighbours by cosine similarity among the given
// KG1 rows (of `left`) and KG2 rows (of `right`). Ties go to the lowest
// index.
std::vector<EntityPair> MutualNearestNeighbors(const Tensor& left,
                                               const std::vector<int>& rows1,
                                               const Tensor& right,
                                               const std::vector<int>& rows2);

// Probation bookkeeping for iterative training.
struct IterState {
  int propose_every = 5;   // epochs between proposal rounds
  int confirmations = 10;  // consecutive rounds needed for promotion
  std::map<EntityPair, int> candidates;  // pair -> consecutive rounds
  int rounds = 0;
};

// One proposal round. Mutual nearest neighbours among entities not covered
// by `seeds` enter (or stay in) the candidate list and gain a confirmation;
// listed pairs that are no longer mutual drop out, which resets their count.
// Pairs reaching `confirmations` are removed from the list and returned.
// `embeddings` holds KG1 rows then KG2 rows.
std::vector<EntityPair> IterativePropose(IterState& state,
                                         const Tensor& embeddings, int num_kg1,
                                         const std::vector<EntityPair>& seeds);

struct ScoredPair {
  EntityPair pair;
  Scalar similarity = 0;
};

struct PseudoSeedDict {
  std::vector<ScoredPair> pairs;
  int capacity = 0;
};

// Greedy one-to-one dictionary from raw-feature cosine similarity: all
// cross pairs with both vectors available, best first (ties by index), each
// accepted when neither side is taken, until `capacity` pairs.
PseudoSeedDict BuildPseudoSeed(const ModalityFeatureTable& kg1,
                               const ModalityFeatureTable& kg2, int capacity);

// Fraction of dictionary pairs found in `truth`. 0 for an empty dictionary.
double PseudoSeedPrecision(const PseudoSeedDict& dict,
                           const std::vector<EntityPair>& truth);

}  // namespace mmalign

#endif  // MMALIGN_SELF_TRAINING_H_
