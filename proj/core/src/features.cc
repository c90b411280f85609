#include "mmalign/features.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "mmalign/error.h"
#include "mmalign/log.h"
#include "mmalign/random.h"

namespace mmalign {

int ModalityFeatureTable::num_available() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

std::vector<std::string> BuildVocab(const std::vector<const Mmkg*>& kgs,
                                    Modality modality, int max_size) {
  std::map<std::string, int64_t> counts;
  for (const Mmkg* kg : kgs) {
    if (modality == Modality::kRelation) {
      for (const RelTriple& t : kg->triples) ++counts[kg->relations[t.relation]];
    } else if (modality == Modality::kAttribute) {
      for (const AttrAssignment& a : kg->attrs) {
        ++counts[kg->attributes[a.attribute]];
      }
    } else {
      throw UsageError("BuildVocab: only relation and attribute modalities");
    }
  }
  std::vector<std::pair<std::string, int64_t>> sorted(counts.begin(),
                                                      counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> vocab;
  for (const auto& [label, count] : sorted) {
    if (max_size > 0 && static_cast<int>(vocab.size()) >= max_size) break;
    vocab.push_back(label);
  }
  return vocab;
}

ModalityFeatureTable BuildBowFeatures(const Mmkg& kg, Modality modality,
                                      const std::vector<std::string>& vocab) {
  if (vocab.empty()) throw UsageError("BuildBowFeatures: empty vocab");
  if (kg.num_entities() == 0) throw DataError("BuildBowFeatures: no entities");
  std::unordered_map<std::string, int> column;
  for (int k = 0; k < static_cast<int>(vocab.size()); ++k) column[vocab[k]] = k;

  ModalityFeatureTable table;
  table.modality = modality;
  const int n = kg.num_entities();
  const int d = static_cast<int>(vocab.size());
  table.values = Tensor({n, d});
  table.mask.assign(n, true);

  const std::vector<std::string>* labels = nullptr;
  if (modality == Modality::kRelation) {
    labels = &kg.relations;
  } else if (modality == Modality::kAttribute) {
    labels = &kg.attributes;
  } else {
    throw UsageError("BuildBowFeatures: only relation and attribute modalities");
  }
  // Label index -> vocab column, -1 when unknown.
  std::vector<int> to_column(labels->size(), -1);
  for (size_t i = 0; i < labels->size(); ++i) {
    auto it = column.find((*labels)[i]);
    if (it != column.end()) to_column[i] = it->second;
  }

  int64_t dropped = 0;
  if (modality == Modality::kRelation) {
    for (const RelTriple& t : kg.triples) {
      const int k = to_column[t.relation];
      if (k < 0) {
        ++dropped;
        continue;
      }
      table.values.at(t.head, k) += 1;
      if (t.tail != t.head) table.values.at(t.tail, k) += 1;
    }
  } else {
    for (const AttrAssignment& a : kg.attrs) {
      const int k = to_column[a.attribute];
      if (k < 0) {
        ++dropped;
        continue;
      }
      table.values.at(a.entity, k) += 1;
    }
  }
  if (dropped > 0) {
    LogWarning(std::string("bag-of-words(") + ModalityTag(modality) +
               "): dropped " + std::to_string(dropped) +
               " occurrences of types outside the vocabulary");
  }
  return table;
}

ModalityFeatureTable DenseFeatureTable(const Mmkg& kg, Modality modality,
                                       int dim) {
  const DenseFeatures* features = nullptr;
  if (modality == Modality::kVisual) {
    features = &kg.visual;
  } else if (modality == Modality::kSurface) {
    features = &kg.surface;
  } else {
    throw UsageError("DenseFeatureTable: only visual and surface modalities");
  }
  const int width = features->dim > 0 ? features->dim : dim;
  if (width <= 0) {
    throw DataError(std::string("no ") + ModalityTag(modality) +
                    " features and no dimension given");
  }
  if (dim > 0 && features->dim > 0 && dim != features->dim) {
    throw DataError(std::string("modality ") + ModalityTag(modality) +
                    ": feature width " + std::to_string(features->dim) +
                    " differs from configured " + std::to_string(dim));
  }
  ModalityFeatureTable table;
  table.modality = modality;
  table.values = Tensor({kg.num_entities(), width});
  table.mask.assign(kg.num_entities(), false);
  for (const auto& [e, v] : features->rows) {
    std::copy(v.begin(), v.end(), table.values.mutable_row(e).begin());
    table.mask[e] = true;
  }
  return table;
}

namespace {

void ColumnStats(const ModalityFeatureTable& table, std::vector<double>& mean,
                 std::vector<double>& sd) {
  const int n = table.num_entities(), d = table.dim();
  mean.assign(d, 0);
  sd.assign(d, 0);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (!table.mask[i]) continue;
    ++count;
    for (int k = 0; k < d; ++k) mean[k] += table.values.at(i, k);
  }
  if (count == 0) {
    throw DataError(std::string("modality ") + ModalityTag(table.modality) +
                    ": no available vectors to estimate statistics from");
  }
  for (double& m : mean) m /= count;
  for (int i = 0; i < n; ++i) {
    if (!table.mask[i]) continue;
    for (int k = 0; k < d; ++k) {
      const double dev = table.values.at(i, k) - mean[k];
      sd[k] += dev * dev;
    }
  }
  for (double& s : sd) s = std::sqrt(s / count);
}

}  // namespace

ModalityFeatureTable ImputeMissing(const ModalityFeatureTable& table,
                                   uint64_t seed) {
  ModalityFeatureTable out = table;
  if (table.num_available() == table.num_entities()) return out;
  std::vector<double> mean, sd;
  ColumnStats(table, mean, sd);
  Rng rng(seed);
  for (int i = 0; i < table.num_entities(); ++i) {
    if (table.mask[i]) continue;
    auto row = out.values.mutable_row(i);
    for (int k = 0; k < table.dim(); ++k) {
      // A degenerate normal reproduces the mean exactly.
      row[k] = static_cast<Scalar>(sd[k] > 0 ? rng.Normal(mean[k], sd[k])
                                             : mean[k]);
    }
    out.mask[i] = true;
    out.imputed.push_back(i);
  }
  return out;
}

ModalityFeatureTable ReplaceWithMean(const ModalityFeatureTable& table,
                                     const std::vector<int>& entities) {
  std::vector<double> mean, sd;
  ColumnStats(table, mean, sd);
  ModalityFeatureTable out = table;
  for (int e : entities) {
    if (e < 0 || e >= table.num_entities()) {
      throw UsageError("ReplaceWithMean: entity index out of range");
    }
    auto row = out.values.mutable_row(e);
    for (int k = 0; k < table.dim(); ++k) row[k] = static_cast<Scalar>(mean[k]);
    out.mask[e] = true;
  }
  return out;
}

AlignmentSplit SplitAlignments(const std::vector<std::pair<int, int>>& pairs,
                               double ratio, uint64_t seed) {
  if (!(ratio > 0 && ratio < 1)) {
    throw UsageError("split ratio must lie in (0, 1), got " +
                     std::to_string(ratio));
  }
  if (pairs.size() < 2) throw DataError("need at least 2 alignment pairs");
  std::vector<std::pair<int, int>> shuffled = pairs;
  Rng rng(seed);
  rng.Shuffle(shuffled);
  const size_t n_train = static_cast<size_t>(std::llround(ratio * pairs.size()));
  AlignmentSplit split;
  split.ratio = ratio;
  split.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.test.assign(shuffled.begin() + n_train, shuffled.end());
  return split;
}

}  // namespace mmalign
