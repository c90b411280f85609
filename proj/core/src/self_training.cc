#include "mmalign/self_training.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "mmalign/log.h"
#include "mmalign/similarity.h"

namespace mmalign {

std::vector<EntityPair> MutualNearestNeighbors(const Tensor& left,
                                               const std::vector<int>& rows1,
                                               const Tensor& right,
                                               const std::vector<int>& rows2) {
  if (rows1.empty() || rows2.empty()) return {};
  const Tensor sim = CosineSimilarity(left, rows1, right, rows2);
  const int n1 = static_cast<int>(rows1.size());
  const int n2 = static_cast<int>(rows2.size());
  std::vector<int> best_right(n1, 0), best_left(n2, 0);
  for (int i = 0; i < n1; ++i) {
    for (int j = 1; j < n2; ++j) {
      if (sim.at(i, j) > sim.at(i, best_right[i])) best_right[i] = j;
    }
  }
  for (int j = 0; j < n2; ++j) {
    for (int i = 1; i < n1; ++i) {
      if (sim.at(i, j) > sim.at(best_left[j], j)) best_left[j] = i;
    }
  }
  std::vector<EntityPair> pairs;
  for (int i = 0; i < n1; ++i) {
    if (best_left[best_right[i]] == i) {
      pairs.emplace_back(rows1[i], rows2[best_right[i]]);
    }
  }
  return pairs;
}

std::vector<EntityPair> IterativePropose(IterState& state,
                                         const Tensor& embeddings, int num_kg1,
                                         const std::vector<EntityPair>& seeds) {
  const int n = embeddings.dim(0);
  std::vector<bool> taken(n, false);
  for (const auto& [a, b] : seeds) {
    taken[a] = true;
    taken[num_kg1 + b] = true;
  }
  std::vector<int> rows1, rows2;
  for (int r = 0; r < n; ++r) {
    if (taken[r]) continue;
    (r < num_kg1 ? rows1 : rows2).push_back(r);
  }
  std::set<EntityPair> mutual;
  for (const auto& [a, b] :
       MutualNearestNeighbors(embeddings, rows1, embeddings, rows2)) {
    mutual.emplace(a, b - num_kg1);
  }
  ++state.rounds;

  std::map<EntityPair, int> next;
  std::vector<EntityPair> promoted;
  for (const EntityPair& p : mutual) {
    auto it = state.candidates.find(p);
    const int count = (it == state.candidates.end() ? 0 : it->second) + 1;
    if (count >= state.confirmations) {
      promoted.push_back(p);
    } else {
      next[p] = count;
    }
  }
  state.candidates = std::move(next);
  return promoted;
}

PseudoSeedDict BuildPseudoSeed(const ModalityFeatureTable& kg1,
                               const ModalityFeatureTable& kg2, int capacity) {
  PseudoSeedDict dict;
  if (capacity < 0) throw UsageError("pseudo seed: negative capacity");
  const int limit = std::min(kg1.num_entities(), kg2.num_entities());
  if (capacity > limit) {
    LogWarning("pseudo seed: capacity " + std::to_string(capacity) +
               " exceeds min(|E1|, |E2|) = " + std::to_string(limit) +
               "; clamped");
    capacity = limit;
  }
  dict.capacity = capacity;
  if (capacity == 0) return dict;
  if (kg1.dim() != kg2.dim()) {
    throw ShapeError("pseudo seed", kg1.values.shape(), kg2.values.shape());
  }
  std::vector<int> rows1, rows2;
  for (int i = 0; i < kg1.num_entities(); ++i) {
    if (kg1.mask[i]) rows1.push_back(i);
  }
  for (int j = 0; j < kg2.num_entities(); ++j) {
    if (kg2.mask[j]) rows2.push_back(j);
  }
  if (rows1.empty() || rows2.empty()) {
    throw DataError("pseudo seed: reference modality missing on one side");
  }
  const Tensor sim = CosineSimilarity(kg1.values, rows1, kg2.values, rows2);
  std::vector<ScoredPair> all;
  all.reserve(rows1.size() * rows2.size());
  for (size_t i = 0; i < rows1.size(); ++i) {
    for (size_t j = 0; j < rows2.size(); ++j) {
      all.push_back({{rows1[i], rows2[j]},
                     sim.at(static_cast<int>(i), static_cast<int>(j))});
    }
  }
  std::sort(all.begin(), all.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.pair < b.pair;
  });
  std::vector<bool> used1(kg1.num_entities(), false);
  std::vector<bool> used2(kg2.num_entities(), false);
  for (const ScoredPair& p : all) {
    if (static_cast<int>(dict.pairs.size()) >= capacity) break;
    if (used1[p.pair.first] || used2[p.pair.second]) continue;
    used1[p.pair.first] = used2[p.pair.second] = true;
    dict.pairs.push_back(p);
  }
  return dict;
}

double PseudoSeedPrecision(const PseudoSeedDict& dict,
                           const std::vector<EntityPair>& truth) {
  if (dict.pairs.empty()) return 0;
  std::set<EntityPair> gold(truth.begin(), truth.end());
  int hits = 0;
  for (const ScoredPair& p : dict.pairs) hits += gold.count(p.pair) > 0;
  return static_cast<double>(hits) / dict.pairs.size();
}

}  // namespace mmalign
