#ifndef MMALIGN_EVAL_H_
#define MMALIGN_EVAL_H_

#include <map>
#include <string>
#include <vector>

#include "mmalign/self_training.h"
#include "mmalign/tensor.h"

namespace mmalign {

enum class Direction { kForward, kBackward, kBoth };

const char* DirectionName(Direction d);
Direction ParseDirection(const std::string& name);

enum class CandidatePool {
  kTestTargets,  // target entities of the test pairs
  kAllTargets,   // every entity of the target graph
};

struct RankResult {
  Direction direction = Direction::kForward;
  std::vector<int> ranks;  // 1-based, one per test pair
  int num_candidates = 0;
};

// Ranks each pair's target among the candidates by cosine similarity to its
// source (`source` / `target` rows are the two graphs' embeddings). Equal
// similarities are ordered by ascending target index.
RankResult RankAlignments(const Tensor& source, const Tensor& target,
                          const std::vector<EntityPair>& test,
                          CandidatePool pool = CandidatePool::kTestTargets);

double HitsAtN(const std::vector<int>& ranks, int n);
double MeanReciprocalRank(const std::vector<int>& ranks);
double MeanRank(const std::vector<int>& ranks);

struct Metrics {
  std::map<int, double> hits;  // N -> Hits@N
  double mrr = 0;
  double mr = 0;
};

Metrics ComputeMetrics(const std::vector<int>& ranks,
                       const std::vector<int>& hits_at);

struct MetricsReport {
  Metrics forward;
  Metrics backward;
  Metrics average;  // mean of the two directions
  int num_test = 0;
  int num_candidates = 0;

  // The block for one direction (kBoth -> average).
  const Metrics& Get(Direction d) const;
};

// Ranks the test pairs in both directions over union-row embeddings (KG1
// rows first).
MetricsReport Evaluate(const Tensor& embeddings, int num_kg1,
                       const std::vector<EntityPair>& test,
                       const std::vector<int>& hits_at = {1, 10},
                       CandidatePool pool = CandidatePool::kTestTargets);

// Aligned text table; `direction` selects which blocks to show.
std::string FormatReport(const MetricsReport& report,
                         Direction direction = Direction::kBoth);
// JSON record with every block.
std::string ReportJson(const MetricsReport& report,
                       Direction direction = Direction::kBoth);

}  // namespace mmalign

#endif  // MMALIGN_EVAL_H_
