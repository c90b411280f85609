#include "mmalign/eval.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmalign/error.h"
#include "mmalign/similarity.h"

namespace mmalign {

const char* DirectionName(Direction d) {
  switch (d) {
    case Direction::kForward: return "fwd";
    case Direction::kBackward: return "bwd";
    case Direction::kBoth: return "both";
  }
  return "?";
}

Direction ParseDirection(const std::string& name) {
  if (name == "fwd") return Direction::kForward;
  if (name == "bwd") return Direction::kBackward;
  if (name == "both") return Direction::kBoth;
  throw UsageError("unknown direction '" + name + "' (fwd|bwd|both)");
}

RankResult RankAlignments(const Tensor& source, const Tensor& target,
                          const std::vector<EntityPair>& test,
                          CandidatePool pool) {
  if (test.empty()) throw UsageError("rank: no test pairs");
  std::vector<int> sources, candidates;
  std::set<int> pool_set;
  for (const auto& [s, t] : test) {
    if (s < 0 || s >= source.dim(0) || t < 0 || t >= target.dim(0)) {
      throw DataError("rank: test pair (" + std::to_string(s) + ", " +
                      std::to_string(t) + ") has no embedding");
    }
    sources.push_back(s);
    pool_set.insert(t);
  }
  if (pool == CandidatePool::kAllTargets) {
    candidates = Range(0, target.dim(0));
  } else {
    candidates.assign(pool_set.begin(), pool_set.end());  // ascending
  }
  const Tensor sim = CosineSimilarity(source, sources, target, candidates);
  RankResult result;
  result.num_candidates = static_cast<int>(candidates.size());
  for (size_t i = 0; i < test.size(); ++i) {
    const int truth = test[i].second;
    const int truth_col = static_cast<int>(
        std::lower_bound(candidates.begin(), candidates.end(), truth) -
        candidates.begin());
    const Scalar s = sim.at(static_cast<int>(i), truth_col);
    int rank = 1;
    for (int c = 0; c < result.num_candidates; ++c) {
      const Scalar other = sim.at(static_cast<int>(i), c);
      if (other > s || (other == s && candidates[c] < truth)) ++rank;
    }
    result.ranks.push_back(rank);
  }
  return result;
}

namespace {

void RequireRanks(const std::vector<int>& ranks) {
  if (ranks.empty()) throw UsageError("metrics: empty rank list");
}

}  // namespace

double HitsAtN(const std::vector<int>& ranks, int n) {
  RequireRanks(ranks);
  int hits = 0;
  for (int r : ranks) hits += r <= n;
  return static_cast<double>(hits) / ranks.size();
}

double MeanReciprocalRank(const std::vector<int>& ranks) {
  RequireRanks(ranks);
  double s = 0;
  for (int r : ranks) s += 1.0 / r;
  return s / ranks.size();
}

double MeanRank(const std::vector<int>& ranks) {
  RequireRanks(ranks);
  double s = 0;
  for (int r : ranks) s += r;
  return s / ranks.size();
}

Metrics ComputeMetrics(const std::vector<int>& ranks,
                       const std::vector<int>& hits_at) {
  Metrics m;
  for (int n : hits_at) m.hits[n] = HitsAtN(ranks, n);
  m.mrr = MeanReciprocalRank(ranks);
  m.mr = MeanRank(ranks);
  return m;
}

const Metrics& MetricsReport::Get(Direction d) const {
  switch (d) {
    case Direction::kForward: return forward;
    case Direction::kBackward: return backward;
    case Direction::kBoth: return average;
  }
  return average;
}

MetricsReport Evaluate(const Tensor& embeddings, int num_kg1,
                       const std::vector<EntityPair>& test,
                       const std::vector<int>& hits_at, CandidatePool pool) {
  const int n = embeddings.dim(0);
  const int d = embeddings.dim(1);
  std::vector<Scalar> left(embeddings.data().begin(),
                           embeddings.data().begin() + int64_t(num_kg1) * d);
  std::vector<Scalar> right(embeddings.data().begin() + int64_t(num_kg1) * d,
                            embeddings.data().end());
  const Tensor kg1({num_kg1, d}, std::move(left));
  const Tensor kg2({n - num_kg1, d}, std::move(right));
  std::vector<EntityPair> reversed;
  for (const auto& [a, b] : test) reversed.emplace_back(b, a);

  const RankResult fwd = RankAlignments(kg1, kg2, test, pool);
  const RankResult bwd = RankAlignments(kg2, kg1, reversed, pool);
  MetricsReport report;
  report.num_test = static_cast<int>(test.size());
  report.num_candidates = fwd.num_candidates;
  report.forward = ComputeMetrics(fwd.ranks, hits_at);
  report.backward = ComputeMetrics(bwd.ranks, hits_at);
  for (int h : hits_at) {
    report.average.hits[h] =
        (report.forward.hits[h] + report.backward.hits[h]) / 2;
  }
  report.average.mrr = (report.forward.mrr + report.backward.mrr) / 2;
  report.average.mr = (report.forward.mr + report.backward.mr) / 2;
  return report;
}

namespace {

std::vector<Direction> Blocks(Direction d) {
  if (d == Direction::kBoth) {
    return {Direction::kForward, Direction::kBackward, Direction::kBoth};
  }
  return {d};
}

nlohmann::json MetricsJson(const Metrics& m) {
  nlohmann::json j;
  for (const auto& [n, v] : m.hits) j["hits@" + std::to_string(n)] = v;
  j["mrr"] = m.mrr;
  j["mr"] = m.mr;
  return j;
}

}  // namespace

std::string FormatReport(const MetricsReport& report, Direction direction) {
  std::ostringstream out;
  char buf[128];
  out << "direction";
  for (const auto& [n, v] : report.average.hits) {
    std::snprintf(buf, sizeof(buf), "  %8s", ("Hits@" + std::to_string(n)).c_str());
    out << buf;
  }
  out << "       MRR        MR\n";
  for (Direction d : Blocks(direction)) {
    const Metrics& m = report.Get(d);
    std::snprintf(buf, sizeof(buf), "%-9s", d == Direction::kBoth ? "avg" : DirectionName(d));
    out << buf;
    for (const auto& [n, v] : m.hits) {
      std::snprintf(buf, sizeof(buf), "  %8.4f", v);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "  %8.4f  %8.3f\n", m.mrr, m.mr);
    out << buf;
  }
  out << "test pairs: " << report.num_test
      << ", candidates: " << report.num_candidates << "\n";
  return out.str();
}

std::string ReportJson(const MetricsReport& report, Direction direction) {
  nlohmann::json j;
  j["num_test"] = report.num_test;
  j["num_candidates"] = report.num_candidates;
  for (Direction d : Blocks(direction)) {
    j[d == Direction::kBoth ? "average" : DirectionName(d)] =
        MetricsJson(report.Get(d));
  }
  return j.dump(2);
}

}  // namespace mmalign
