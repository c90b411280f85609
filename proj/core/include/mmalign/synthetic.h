#ifndef MMALIGN_SYNTHETIC_H_
#define MMALIGN_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "mmalign/kg.h"

namespace mmalign {

struct GeneratorConfig {
  int entities = 200;           // per graph
  int relations = 20;           // relation vocabulary size
  int attributes = 30;          // attribute vocabulary size
  double degree = 5;            // average degree (2|T| / N)
  double attrs_per_entity = 3;  // mean attribute assignments per entity
  int visual_dim = 64;          // 0 disables the visual table
  int surface_dim = 32;         // 0 disables the surface table

  // Noise applied when deriving the second graph.
  double rewire_rate = 0;     // fraction of triples whose tail is re-drawn
  double visual_noise = 0;    // sd of additive Gaussian noise on visual rows
  double surface_noise = 0;   // sd of additive Gaussian noise on surface rows
  double visual_missing = 0;  // per-graph probability a visual row is absent
  // Fraction of true pairs whose visual rows (both sides) are replaced by the
  // population mean vector, carrying no alignment signal.
  double visual_uninformative = 0;

  void Validate() const;
};

struct RewireRecord {
  int triple = 0;    // index into kg2.triples
  int old_tail = 0;  // kg2 entity index before rewiring
  int new_tail = 0;
};

struct SyntheticPair {
  PairDataset data;               // alignments hold every true pair
  std::vector<int> permutation;   // kg1 index -> kg2 index
  std::vector<RewireRecord> rewired;
  std::vector<int> uninformative;  // kg1 indices with mean visual rows
};

// Builds a random graph, copies it under a hidden permutation and perturbs
// the copy. With every noise knob at zero the copy is isomorphic and true
// pairs carry identical features.
SyntheticPair GenerateSyntheticPair(const GeneratorConfig& cfg, uint64_t seed);

}  // namespace mmalign

#endif  // MMALIGN_SYNTHETIC_H_
