#ifndef MMALIGN_SIMILARITY_H_
#define MMALIGN_SIMILARITY_H_

#include <vector>

#include "mmalign/tensor.h"

namespace mmalign {

// Rows of `x` scaled to unit norm; zero rows stay zero.
Tensor NormalizeRows(const Tensor& x);

// Cosine similarity between the selected rows of `x` (one output row per
// entry of `rows`) and the selected rows of `y` (one output column per entry
// of `cols`).
Tensor CosineSimilarity(const Tensor& x, const std::vector<int>& rows,
                        const Tensor& y, const std::vector<int>& cols);

// Consecutive indices [begin, end).
std::vector<int> Range(int begin, int end);

}  // namespace mmalign

#endif  // MMALIGN_SIMILARITY_H_
