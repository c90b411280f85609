#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "mmalign/error.h"
#include "mmalign/eval.h"
#include "mmalign/random.h"
#include "mmalign/similarity.h"
#include "oracles.h"

namespace mmalign {
namespace {

const std::vector<int> kRanks = {1, 1, 2, 11};

TEST(Metrics, HitsOnHandList) {
  EXPECT_EQ(HitsAtN(kRanks, 1), 0.5);
  EXPECT_EQ(HitsAtN(kRanks, 10), 0.75);
}

TEST(Metrics, MrrAndMrOnHandList) {
  EXPECT_DOUBLE_EQ(MeanReciprocalRank(kRanks), (1 + 1 + 0.5 + 1.0 / 11) / 4);
  EXPECT_NEAR(MeanReciprocalRank(kRanks), 0.64773, 5e-6);
  EXPECT_EQ(MeanRank(kRanks), 3.75);
}

TEST(Metrics, PerfectRanks) {
  const std::vector<int> ones(7, 1);
  EXPECT_EQ(HitsAtN(ones, 1), 1);
  EXPECT_EQ(HitsAtN(ones, 10), 1);
  EXPECT_EQ(MeanReciprocalRank(ones), 1);
  EXPECT_EQ(MeanRank(ones), 1);
}

TEST(Metrics, EmptyListFails) {
  EXPECT_THROW(HitsAtN({}, 1), Error);
  EXPECT_THROW(MeanReciprocalRank({}), Error);
  EXPECT_THROW(MeanRank({}), Error);
}

TEST(Metrics, PropertiesOnRandomLists) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> ranks;
    for (int i = 0, n = 1 + rng.Index(30); i < n; ++i) ranks.push_back(1 + rng.Index(20));
    EXPECT_GE(MeanReciprocalRank(ranks), HitsAtN(ranks, 1));
    EXPECT_LE(HitsAtN(ranks, 1), HitsAtN(ranks, 10));
    EXPECT_GE(MeanRank(ranks), 1);
    std::vector<int> shuffled = ranks;
    rng.Shuffle(shuffled);
    EXPECT_EQ(HitsAtN(shuffled, 5), HitsAtN(ranks, 5));
    EXPECT_NEAR(MeanReciprocalRank(shuffled), MeanReciprocalRank(ranks), 1e-15);
    EXPECT_NEAR(MeanRank(shuffled), MeanRank(ranks), 1e-12);
  }
}

TEST(Rank, IdenticalTargetAmongOrthogonalIsFirst) {
  const Tensor src = Tensor::FromRows({{1, 0, 0}});
  const Tensor tgt = Tensor::FromRows({{0, 1, 0}, {1, 0, 0}, {0, 0, 1}});
  EXPECT_EQ(RankAlignments(src, tgt, {{0, 1}}, CandidatePool::kAllTargets).ranks,
            std::vector<int>{1});
}

TEST(Rank, EquidistantCandidatesBreakTiesByIndex) {
  const Tensor src = Tensor::FromRows({{1, 0}, {1, 0}, {1, 0}});
  const Tensor tgt = Tensor::FromRows({{0, 1}, {0, 1}, {0, 1}});
  const std::vector<EntityPair> test = {{0, 2}, {1, 0}, {2, 1}};
  const RankResult a = RankAlignments(src, tgt, test);
  EXPECT_EQ(a.ranks, (std::vector<int>{3, 1, 2}));
  EXPECT_EQ(RankAlignments(src, tgt, test).ranks, a.ranks);
}

TEST(Rank, MatchesExhaustiveSortOracle) {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(10 + trial);
    const Tensor src = rng.NormalTensor({10, 4}, 1.0), tgt = rng.NormalTensor({10, 4}, 1.0);
    std::vector<int> perm = Range(0, 10);
    rng.Shuffle(perm);
    std::vector<EntityPair> test;
    for (int i = 0; i < 6; ++i) test.emplace_back(i, perm[i]);
    std::vector<int> pool;
    for (const auto& p : test) pool.push_back(p.second);
    std::sort(pool.begin(), pool.end());
    EXPECT_EQ(RankAlignments(src, tgt, test).ranks,
              testing::RankOracle(testing::ToMat(src), testing::ToMat(tgt), test, pool));
    EXPECT_EQ(RankAlignments(src, tgt, test, CandidatePool::kAllTargets).ranks,
              testing::RankOracle(testing::ToMat(src), testing::ToMat(tgt), test, Range(0, 10)));
  }
}

TEST(Rank, RotationLeavesRanksUnchanged) {
  Rng rng(2);
  const Tensor src = rng.NormalTensor({8, 2}, 1.0), tgt = rng.NormalTensor({8, 2}, 1.0);
  const double c = std::cos(0.7), s = std::sin(0.7);
  auto rotate = [&](const Tensor& x) {
    Tensor y = x;
    for (int i = 0; i < x.dim(0); ++i) {
      y.at(i, 0) = static_cast<Scalar>(c * x.at(i, 0) - s * x.at(i, 1));
      y.at(i, 1) = static_cast<Scalar>(s * x.at(i, 0) + c * x.at(i, 1));
    }
    return y;
  };
  std::vector<EntityPair> test;
  for (int i = 0; i < 8; ++i) test.emplace_back(i, (i + 3) % 8);
  EXPECT_EQ(RankAlignments(rotate(src), rotate(tgt), test).ranks,
            RankAlignments(src, tgt, test).ranks);
}

TEST(Rank, MissingEmbeddingFails) {
  const Tensor src = Tensor::FromRows({{1, 0}});
  const Tensor tgt = Tensor::FromRows({{1, 0}});
  EXPECT_THROW(RankAlignments(src, tgt, {{0, 3}}), Error);
}

TEST(Evaluate, AveragesDirectionsAndFormats) {
  Rng rng(3);
  const Tensor emb = rng.NormalTensor({12, 4}, 1.0);
  std::vector<EntityPair> test;
  for (int i = 0; i < 6; ++i) test.emplace_back(i, 5 - i);
  const MetricsReport r = Evaluate(emb, 6, test, {1, 3});
  EXPECT_NEAR(r.average.mrr, 0.5 * (r.forward.mrr + r.backward.mrr), 1e-15);
  EXPECT_NEAR(r.average.hits.at(3), 0.5 * (r.forward.hits.at(3) + r.backward.hits.at(3)), 1e-15);
  EXPECT_EQ(&r.Get(Direction::kBoth), &r.average);
  EXPECT_EQ(r.num_candidates, 6);
  const std::string text = FormatReport(r, Direction::kForward);
  EXPECT_NE(text.find("fwd"), std::string::npos);
  EXPECT_EQ(text.find("bwd"), std::string::npos);
  EXPECT_NE(ReportJson(r).find("\"mrr\""), std::string::npos);
}

}  // namespace
}  // namespace mmalign
