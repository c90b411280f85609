#include "mmalign/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mmalign/error.h"
#include "mmalign/random.h"

namespace mmalign {

void GeneratorConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("generator: " + what);
  };
  require(entities >= 2, "need at least 2 entities");
  require(relations >= 1, "need at least 1 relation type");
  require(attributes >= 1, "need at least 1 attribute type");
  require(degree > 0, "degree must be positive");
  require(degree < entities, "infeasible config: degree " +
                                 std::to_string(degree) + " >= entity count " +
                                 std::to_string(entities));
  require(attrs_per_entity >= 0, "attrs_per_entity must be >= 0");
  require(visual_dim >= 0 && surface_dim >= 0, "feature dims must be >= 0");
  auto rate = [&](double v, const char* name) {
    require(v >= 0 && v <= 1, std::string(name) + " must lie in [0, 1]");
  };
  rate(rewire_rate, "rewire rate");
  rate(visual_missing, "visual missing rate");
  rate(visual_uninformative, "visual uninformative rate");
  require(visual_noise >= 0 && surface_noise >= 0, "noise sd must be >= 0");
  require(visual_uninformative == 0 || visual_dim > 0,
          "uninformative visual rows need visual_dim > 0");
}

namespace {

std::vector<double> ZipfWeights(int n) {
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) w[k] = 1.0 / (k + 1);
  return w;
}

void AddEntities(Mmkg& kg, int n, int64_t id_base, const std::string& prefix) {
  for (int i = 0; i < n; ++i) {
    kg.entity_ids.push_back(id_base + i);
    kg.entity_names.push_back(prefix + std::to_string(i));
  }
  kg.Reindex();
}

DenseFeatures GaussianRows(int n, int dim, Rng& rng) {
  DenseFeatures f;
  f.dim = dim;
  for (int i = 0; i < n; ++i) {
    std::vector<Scalar> v(dim);
    for (auto& x : v) x = static_cast<Scalar>(rng.Normal());
    f.rows.emplace(i, std::move(v));
  }
  return f;
}

// Copies rows onto the second graph's indices with additive noise.
DenseFeatures PermutedCopy(const DenseFeatures& base,
                           const std::vector<int>& perm, double noise,
                           Rng& rng) {
  DenseFeatures f;
  f.dim = base.dim;
  for (const auto& [i, v] : base.rows) {
    std::vector<Scalar> w = v;
    if (noise > 0) {
      for (auto& x : w) x += static_cast<Scalar>(rng.Normal(0, noise));
    }
    f.rows.emplace(perm[i], std::move(w));
  }
  return f;
}

void DropRows(DenseFeatures& f, double rate, Rng& rng) {
  if (rate <= 0) return;
  for (auto it = f.rows.begin(); it != f.rows.end();) {
    it = rng.Bernoulli(rate) ? f.rows.erase(it) : std::next(it);
  }
}

}  // namespace

SyntheticPair GenerateSyntheticPair(const GeneratorConfig& cfg, uint64_t seed) {
  cfg.Validate();
  const int n = cfg.entities;
  Rng root(seed);
  Rng structure = root.Fork(1);
  Rng attr_rng = root.Fork(2);
  Rng perm_rng = root.Fork(3);
  Rng noise_rng = root.Fork(4);
  Rng visual_rng = root.Fork(5);
  Rng surface_rng = root.Fork(6);

  SyntheticPair out;
  Mmkg& kg1 = out.data.kg1;
  Mmkg& kg2 = out.data.kg2;
  AddEntities(kg1, n, 0, "e");
  AddEntities(kg2, n, n, "f");
  for (int r = 0; r < cfg.relations; ++r) {
    kg1.InternRelation("r" + std::to_string(r));
  }
  for (int a = 0; a < cfg.attributes; ++a) {
    kg1.InternAttribute("a" + std::to_string(a));
  }

  // Relation triples of the first graph.
  const std::vector<double> rel_weights = ZipfWeights(cfg.relations);
  const int64_t num_edges = std::llround(n * cfg.degree / 2);
  std::set<RelTriple> seen;
  int64_t attempts = 0;
  while (static_cast<int64_t>(kg1.triples.size()) < num_edges) {
    if (++attempts > 100 * num_edges + 1000) {
      throw UsageError("generator: could not place " +
                       std::to_string(num_edges) + " distinct triples");
    }
    RelTriple t;
    t.head = structure.Index(n);
    t.tail = structure.Index(n - 1);
    if (t.tail >= t.head) ++t.tail;
    t.relation = structure.Weighted(rel_weights);
    if (seen.insert(t).second) kg1.triples.push_back(t);
  }

  // Attribute assignments: distinct types per entity.
  const std::vector<double> attr_weights = ZipfWeights(cfg.attributes);
  for (int i = 0; i < n; ++i) {
    const int count = std::min(attr_rng.Poisson(cfg.attrs_per_entity),
                               cfg.attributes);
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < count) {
      chosen.insert(attr_rng.Weighted(attr_weights));
    }
    for (int a : chosen) kg1.attrs.push_back({i, a});
  }

  // Hidden permutation kg1 -> kg2.
  out.permutation.resize(n);
  std::iota(out.permutation.begin(), out.permutation.end(), 0);
  perm_rng.Shuffle(out.permutation);
  const std::vector<int>& perm = out.permutation;

  kg2.relations = kg1.relations;
  kg2.attributes = kg1.attributes;
  for (const RelTriple& t : kg1.triples) {
    kg2.triples.push_back({perm[t.head], t.relation, perm[t.tail]});
  }
  perm_rng.Shuffle(kg2.triples);
  for (const AttrAssignment& a : kg1.attrs) {
    kg2.attrs.push_back({perm[a.entity], a.attribute});
  }
  std::sort(kg2.attrs.begin(), kg2.attrs.end());

  // Structural noise: redraw the tail of a random subset of triples.
  if (cfg.rewire_rate > 0) {
    std::set<RelTriple> present(kg2.triples.begin(), kg2.triples.end());
    for (int k = 0; k < static_cast<int>(kg2.triples.size()); ++k) {
      if (!noise_rng.Bernoulli(cfg.rewire_rate)) continue;
      RelTriple& t = kg2.triples[k];
      for (int tries = 0; tries < 100; ++tries) {
        RelTriple moved = t;
        moved.tail = noise_rng.Index(n);
        if (moved.tail == t.head || moved.tail == t.tail) continue;
        if (present.count(moved)) continue;
        present.erase(t);
        present.insert(moved);
        out.rewired.push_back({k, t.tail, moved.tail});
        t = moved;
        break;
      }
    }
  }

  if (cfg.visual_dim > 0) {
    kg1.visual = GaussianRows(n, cfg.visual_dim, visual_rng);
    kg2.visual = PermutedCopy(kg1.visual, perm, cfg.visual_noise, noise_rng);
    if (cfg.visual_uninformative > 0) {
      std::vector<double> mean(cfg.visual_dim, 0);
      for (const auto& [i, v] : kg1.visual.rows) {
        for (int k = 0; k < cfg.visual_dim; ++k) mean[k] += v[k];
      }
      std::vector<Scalar> mean_row(cfg.visual_dim);
      for (int k = 0; k < cfg.visual_dim; ++k) {
        mean_row[k] = static_cast<Scalar>(mean[k] / n);
      }
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      visual_rng.Shuffle(order);
      const int count =
          static_cast<int>(std::llround(cfg.visual_uninformative * n));
      out.uninformative.assign(order.begin(), order.begin() + count);
      std::sort(out.uninformative.begin(), out.uninformative.end());
      for (int i : out.uninformative) {
        kg1.visual.rows[i] = mean_row;
        kg2.visual.rows[perm[i]] = mean_row;
      }
    }
    DropRows(kg1.visual, cfg.visual_missing, noise_rng);
    DropRows(kg2.visual, cfg.visual_missing, noise_rng);
  }
  if (cfg.surface_dim > 0) {
    kg1.surface = GaussianRows(n, cfg.surface_dim, surface_rng);
    kg2.surface = PermutedCopy(kg1.surface, perm, cfg.surface_noise, noise_rng);
  }

  for (int i = 0; i < n; ++i) out.data.alignments.emplace_back(i, perm[i]);
  return out;
}

}  // namespace mmalign
