#ifndef MMALIGN_TESTS_FIXTURES_H_
#define MMALIGN_TESTS_FIXTURES_H_

#include <vector>

#include "mmalign/mmh.h"
#include "mmalign/random.h"
#include "oracles.h"

namespace mmalign::testing {

// Random MHCA parameters bound as leaves, plus the same numbers as plain
// matrices for the oracle.
struct MhcaFixture {
  MhcaParams params;
  MhcaWeights weights;
};
MhcaFixture RandomMhca(Tape& tape, Rng& rng, int d, int heads);

struct FfnFixture {
  FfnParams params;
  Mat w1, w2;
  Vec b1, b2, gain, bias;
};
FfnFixture RandomFfn(Tape& tape, Rng& rng, int d, int d_in);

// Per-modality random embeddings (entities x d), as leaves.
std::vector<Var> RandomModalities(Tape& tape, Rng& rng, int entities, int d,
                                  int num_modalities);

// [entity][head] -> |M| x |M| from the library's beta layout.
std::vector<std::vector<Mat>> BetaByEntity(
    const std::vector<std::vector<Var>>& beta);

}  // namespace mmalign::testing

#endif  // MMALIGN_TESTS_FIXTURES_H_
