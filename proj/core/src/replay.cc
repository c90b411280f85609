#include "mmalign/replay.h"

#include <algorithm>

#include "mmalign/similarity.h"

namespace mmalign {

MerpState RefreshMerp(const Tensor& fused, int num_kg1,
                      const std::vector<int>& counterpart) {
  const int n = fused.dim(0);
  const int num_kg2 = n - num_kg1;
  if (num_kg1 <= 0 || num_kg2 <= 0) {
    throw UsageError("merp: both graphs need at least one entity");
  }
  if (static_cast<int>(counterpart.size()) != n) {
    throw UsageError("merp: counterpart table does not cover every entity");
  }
  const std::vector<int> left = Range(0, num_kg1);
  const std::vector<int> right = Range(num_kg1, n);
  const Tensor sim = CosineSimilarity(fused, left, fused, right);

  MerpState state;
  state.neighbor.assign(n, -1);
  state.score.assign(n, 0);
  auto consider = [&](int row, int other, Scalar s) {
    if (other == counterpart[row]) return;
    if (state.neighbor[row] < 0 || s > state.score[row]) {
      state.neighbor[row] = other;
      state.score[row] = s;
    }
  };
  // Ascending scans with a strict comparison keep the lowest row on ties.
  for (int i = 0; i < num_kg1; ++i) {
    for (int j = 0; j < num_kg2; ++j) consider(i, num_kg1 + j, sim.at(i, j));
  }
  for (int j = 0; j < num_kg2; ++j) {
    for (int i = 0; i < num_kg1; ++i) consider(num_kg1 + j, i, sim.at(i, j));
  }
  return state;
}

NegativeSets ExpandNegatives(const Batch& batch, const NegativeSets& in_batch,
                             const MerpState& state) {
  NegativeSets out = in_batch;
  auto add = [&](std::vector<int>& set, int anchor, int positive) {
    if (anchor < 0 || anchor >= state.size()) {
      throw UsageError("merp: anchor row outside the replay table");
    }
    const int hard = state.neighbor[anchor];
    if (hard < 0 || hard == anchor || hard == positive) return;
    auto it = std::lower_bound(set.begin(), set.end(), hard);
    if (it == set.end() || *it != hard) set.insert(it, hard);
  };
  for (size_t i = 0; i < batch.size(); ++i) {
    add(out.forward[i], batch[i].first, batch[i].second);
    add(out.backward[i], batch[i].second, batch[i].first);
  }
  return out;
}

}  // namespace mmalign
