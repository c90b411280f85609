#ifndef MMALIGN_FEATURES_H_
#define MMALIGN_FEATURES_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmalign/kg.h"
#include "mmalign/tensor.h"

namespace mmalign {

// Raw per-entity input vectors for one modality.
struct ModalityFeatureTable {
  Modality modality = Modality::kRelation;
  Tensor values;           // num_entities x dim; zero rows where unavailable
  std::vector<bool> mask;  // true where the entity has a vector
  std::vector<int> imputed;  // entities whose vector was imputed

  int num_entities() const { return values.empty() ? 0 : values.dim(0); }
  int dim() const { return values.empty() ? 0 : values.dim(1); }
  int num_available() const;
};

// Ordered type list over the relation (or attribute) labels of the given
// graphs, most frequent first, ties broken by label. `max_size` <= 0 keeps
// every label.
std::vector<std::string> BuildVocab(const std::vector<const Mmkg*>& kgs,
                                    Modality modality, int max_size);

// Bag-of-words counts. For relations, entry k of entity i counts the triples
// incident to i (as head or tail) whose relation is vocab[k]; a self-loop
// triple counts once. For attributes, entry k counts assignments of
// vocab[k] to i. Labels missing from `vocab` are dropped with a warning.
ModalityFeatureTable BuildBowFeatures(const Mmkg& kg, Modality modality,
                                      const std::vector<std::string>& vocab);

// Dense visual or surface table from the graph's partial feature map.
// `dim` fixes the width when the graph has no rows at all.
ModalityFeatureTable DenseFeatureTable(const Mmkg& kg, Modality modality,
                                       int dim = 0);

// Fills every unavailable row with draws from Normal(mu_k, sd_k), the
// per-coordinate mean and (population) standard deviation of the available
// rows. Errors when no row is available.
ModalityFeatureTable ImputeMissing(const ModalityFeatureTable& table,
                                   uint64_t seed);

// Replaces the rows of `entities` by the per-coordinate mean of the available
// rows (an uninformative input).
ModalityFeatureTable ReplaceWithMean(const ModalityFeatureTable& table,
                                     const std::vector<int>& entities);

struct AlignmentSplit {
  std::vector<std::pair<int, int>> train;
  std::vector<std::pair<int, int>> test;
  double ratio = 0;
};

// Shuffles `pairs` under `seed` and takes round(ratio * |pairs|) for train.
AlignmentSplit SplitAlignments(const std::vector<std::pair<int, int>>& pairs,
                               double ratio, uint64_t seed);

}  // namespace mmalign

#endif  // MMALIGN_FEATURES_H_
