#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "mmalign/error.h"
#include "mmalign/loss.h"
#include "mmalign/ops.h"
#include "mmalign/optim.h"
#include "mmalign/random.h"
#include "mmalign/replay.h"
#include "mmalign/self_training.h"
#include "mmalign/similarity.h"
#include "mmalign/synthetic.h"
#include "mmalign/trainer.h"
#include "oracles.h"

namespace mmalign {
namespace {

using Span = std::span<const Scalar>;

TEST(AlignmentProbability, NoNegativesIsCertain) {
  const std::vector<Scalar> a = {1, 0}, p = {0.3, 0.4};
  EXPECT_EQ(AlignmentProbability(a, p, {}, 0.1), 1);
}

TEST(AlignmentProbability, TiedNegativeIsAHalf) {
  const std::vector<Scalar> a = {1, 0}, p = {0.5, 1}, n = {0.5, -1};
  EXPECT_DOUBLE_EQ(AlignmentProbability(a, p, {Span(n)}, 0.1), 0.5);
}

TEST(AlignmentProbability, OrthogonalNegativeAtTemperatureTenth) {
  const std::vector<Scalar> a = {1, 0}, p = {1, 0}, n = {0, 1};
  const double expect = std::exp(10.0) / (std::exp(10.0) + 1);
  EXPECT_NEAR(AlignmentProbability(a, p, {Span(n)}, 0.1), expect, 1e-15);
  EXPECT_NEAR(expect, 0.9999546, 1e-7);
}

TEST(AlignmentProbability, NonPositiveTemperatureFails) {
  const std::vector<Scalar> a = {1, 0};
  EXPECT_THROW(AlignmentProbability(a, a, {}, 0), Error);
  EXPECT_THROW(AlignmentProbability(a, a, {}, -1), Error);
}

Scalar LossOf(const Tensor& emb, const Batch& batch, const NegativeSets& negs,
              bool normalize = true) {
  Tape tape;
  return ContrastiveLoss(tape.Leaf(emb), batch, negs, 0.1, normalize).loss.value().item();
}

TEST(ContrastiveLoss, CertainPairsGiveZero) {
  Tensor emb = Tensor::FromRows({{1, 0}, {1, 0}});
  EXPECT_EQ(LossOf(emb, {{0, 1}}, InBatchNegatives({{0, 1}})), 0);
}

TEST(ContrastiveLoss, EvenOddsGiveLnTwo) {
  Tensor emb = Tensor::FromRows({{1, 2}, {1, 2}, {1, 2}});
  NegativeSets negs{{{2}}, {{2}}};
  EXPECT_NEAR(LossOf(emb, {{0, 1}}, negs), std::log(2.0), 1e-12);
}

TEST(ContrastiveLoss, DuplicatedPairsLeaveTheLossUnchanged) {
  Rng rng(1);
  const Tensor emb = rng.NormalTensor({6, 4}, 1.0);
  const Batch batch = {{0, 3}, {1, 4}, {2, 5}};
  Batch doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  EXPECT_NEAR(LossOf(emb, batch, InBatchNegatives(batch)),
              LossOf(emb, doubled, InBatchNegatives(doubled)), 1e-12);
}

TEST(ContrastiveLoss, InvariantToPairOrderAndNonNegative) {
  Rng rng(2);
  const Tensor emb = rng.NormalTensor({10, 4}, 1.0);
  Batch batch = {{0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}};
  const Scalar a = LossOf(emb, batch, InBatchNegatives(batch));
  std::reverse(batch.begin(), batch.end());
  std::swap(batch[1], batch[3]);
  EXPECT_NEAR(LossOf(emb, batch, InBatchNegatives(batch)), a, 1e-12);
  EXPECT_GE(a, 0);
}

TEST(ContrastiveLoss, MatchesOracleWithAndWithoutNormalization) {
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(30 + trial);
    const Tensor emb = rng.NormalTensor({8, 3}, 0.4);
    const Batch batch = {{0, 4}, {1, 5}, {2, 6}, {3, 7}};
    const NegativeSets negs = InBatchNegatives(batch);
    for (bool norm : {true, false}) {
      EXPECT_NEAR(LossOf(emb, batch, negs, norm),
                  testing::ContrastiveOracle(testing::ToMat(emb), batch, negs.forward,
                                             negs.backward, 0.1, norm),
                  1e-10);
    }
  }
}

TEST(ContrastiveLoss, VanishingProbabilityIsClampedAndFlagged) {
  // Unnormalized, the negative wins by a margin of 1e4 / tau.
  Tensor emb = Tensor::FromRows({{100, 0}, {-100, 0}, {100, 0}});
  Tape tape;
  auto r = ContrastiveLoss(tape.Leaf(emb), {{0, 1}}, NegativeSets{{{2}}, {{2}}}, 0.1, false);
  EXPECT_GT(r.clamped, 0);
  // Forward is floored; backward is a tie.
  EXPECT_NEAR(r.loss.value().item(), 0.5 * (-std::log(1e-12) + std::log(2.0)), 1e-9);
}

TEST(InBatchNegatives, ExcludeAnchorAndPositive) {
  const Batch batch = {{0, 3}, {1, 4}};
  const NegativeSets n = InBatchNegatives(batch);
  EXPECT_EQ(n.forward[0], (std::vector<int>{1, 4}));
  EXPECT_EQ(n.backward[1], (std::vector<int>{0, 3}));
}

// A hand-built forward output: pair rows identical, other rows orthogonal.
struct ToyOutput {
  Tape tape;
  ModelOutput out;
};

void FillToyOutput(ToyOutput& t, int num_modalities) {
  // Rows 0, 1 belong to KG1; rows 2, 3 to KG2; pairs (0, 2) and (1, 3).
  const Tensor emb = Tensor::FromRows({{1, 0}, {0, 1}, {1, 0}, {0, 1}});
  for (int m = 0; m < num_modalities; ++m) {
    t.out.h.push_back(t.tape.Leaf(emb));
    t.out.attended.push_back(t.tape.Leaf(emb));
  }
  t.out.early = t.tape.Leaf(emb);
  t.out.late = t.tape.Leaf(emb);
}

TEST(TotalLoss, AlignedPairsOrthogonalNegativesMatchScalarOracle) {
  ToyOutput t;
  FillToyOutput(t, 3);
  const Batch batch = {{0, 2}, {1, 3}};
  // Each anchor: positive logit 10, two negatives at 0.
  const double single = -std::log(std::exp(10.0) / (std::exp(10.0) + 2));
  LossConfig cfg;
  EXPECT_NEAR(TotalLoss(t.out, batch, cfg).total.value().item(), (3 * 2 + 1) * single, 1e-6);
  cfg.use_licl = false;
  EXPECT_NEAR(TotalLoss(t.out, batch, cfg).total.value().item(), (3 + 1) * single, 1e-6);
}

TEST(TotalLoss, WithoutLateIntraIsFusedPlusIntra) {
  Rng rng(3);
  ToyOutput t;
  for (int m = 0; m < 2; ++m) {
    t.out.h.push_back(t.tape.Leaf(rng.NormalTensor({6, 3}, 1.0)));
    t.out.attended.push_back(t.tape.Leaf(rng.NormalTensor({6, 3}, 1.0)));
  }
  t.out.early = t.tape.Leaf(rng.NormalTensor({6, 6}, 1.0));
  const Batch batch = {{0, 3}, {1, 4}, {2, 5}};
  LossConfig cfg;
  cfg.use_licl = false;
  const LossBreakdown b = TotalLoss(t.out, batch, cfg);
  EXPECT_EQ(b.late_intra, 0);
  EXPECT_NEAR(b.total.value().item(), b.fused + b.intra, 1e-12);
}

TEST(TotalLoss, SinglePairWithoutNegativesIsZero) {
  Rng rng(4);
  ToyOutput t;
  t.out.h = {t.tape.Leaf(rng.NormalTensor({2, 3}, 1.0))};
  t.out.attended = {t.tape.Leaf(rng.NormalTensor({2, 3}, 1.0))};
  t.out.early = t.tape.Leaf(rng.NormalTensor({2, 3}, 1.0));
  EXPECT_EQ(TotalLoss(t.out, {{0, 1}}, LossConfig{}).total.value().item(), 0);
}

TEST(Merp, NeighbourSkipsTheKnownCounterpart) {
  // a1 = 0, b1 = 1 | a2 = 2, b2 = 3; (a1, a2) aligned.
  const Tensor emb = Tensor::FromRows({{1, 0}, {0, 1}, {1, 0.1}, {1, 0.5}});
  const std::vector<int> counterpart = {2, -1, 0, -1};
  const MerpState s = RefreshMerp(emb, 2, counterpart);
  EXPECT_EQ(s.neighbor[0], 3);
  // Brute force over the 2 x 2 cross table for every row.
  const Tensor sim = CosineSimilarity(emb, Range(0, 4), emb, Range(0, 4));
  for (int r = 0; r < 4; ++r) {
    int best = -1;
    for (int c = r < 2 ? 2 : 0; c < (r < 2 ? 4 : 2); ++c) {
      if (c == counterpart[r]) continue;
      if (best < 0 || sim.at(r, c) > sim.at(r, best)) best = c;
    }
    EXPECT_EQ(s.neighbor[r], best) << r;
    EXPECT_NEAR(s.score[r], sim.at(r, best), 1e-12);
  }
}

TEST(Merp, UnalignedEntityTakesTheNearestOutright) {
  const Tensor emb = Tensor::FromRows({{1, 0}, {0, 1}, {1, 0.1}, {1, 0.5}});
  const MerpState s = RefreshMerp(emb, 2, {-1, -1, -1, -1});
  EXPECT_EQ(s.neighbor[0], 2);
}

TEST(Merp, RefreshIsDeterministicAndNeedsBothSides) {
  Rng rng(5);
  const Tensor emb = rng.NormalTensor({7, 3}, 1.0);
  const std::vector<int> cp(7, -1);
  const MerpState a = RefreshMerp(emb, 3, cp), b = RefreshMerp(emb, 3, cp);
  EXPECT_EQ(a.neighbor, b.neighbor);
  EXPECT_EQ(a.score, b.score);
  EXPECT_THROW(RefreshMerp(emb, 7, cp), Error);
}

TEST(Merp, ExpansionIsASupersetWithoutDuplicates) {
  const Batch batch = {{0, 3}, {1, 4}};
  MerpState s;
  s.neighbor = {4, 5, 3, 2, 0, 1};
  s.score.assign(6, 0.5);
  const NegativeSets in = InBatchNegatives(batch);
  const NegativeSets ex = ExpandNegatives(batch, in, s);
  // Anchor 0's neighbour (4) is already in the batch.
  EXPECT_EQ(ex.forward[0], in.forward[0]);
  for (size_t i = 0; i < batch.size(); ++i) {
    for (auto [a, b] : {std::pair{&in.forward[i], &ex.forward[i]},
                        std::pair{&in.backward[i], &ex.backward[i]}}) {
      EXPECT_TRUE(std::includes(b->begin(), b->end(), a->begin(), a->end()));
      EXPECT_EQ(std::set<int>(b->begin(), b->end()).size(), b->size());
    }
  }
  EXPECT_EQ(ex.forward[1], (std::vector<int>{0, 3, 5}));
}

TEST(Merp, SinglePairBatchGetsExactlyTheReplayNegative) {
  MerpState s;
  s.neighbor = {3, 2, 1, 0};
  s.score.assign(4, 0.1);
  const Batch batch = {{0, 2}};
  const NegativeSets ex = ExpandNegatives(batch, InBatchNegatives(batch), s);
  EXPECT_EQ(ex.forward[0], std::vector<int>{3});
  EXPECT_EQ(ex.backward[0], std::vector<int>{1});
}

// KG1 rows 0..2, KG2 rows 3..5; each KG1 row i is closest to KG2 row i.
Tensor MutualEmbeddings() {
  return Tensor::FromRows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                           {1, 0.1, 0}, {0, 1, 0.1}, {0.1, 0, 1}});
}

TEST(IterativePropose, PromotesOnTheConfirmingRound) {
  IterState st;
  st.confirmations = 10;
  const Tensor emb = MutualEmbeddings();
  const std::vector<EntityPair> seeds = {{0, 0}};
  for (int round = 1; round < 10; ++round) {
    EXPECT_TRUE(IterativePropose(st, emb, 3, seeds).empty()) << round;
  }
  const auto promoted = IterativePropose(st, emb, 3, seeds);
  EXPECT_EQ(promoted, (std::vector<EntityPair>{{1, 1}, {2, 2}}));
}

TEST(IterativePropose, BrokenStreakResetsTheCounter) {
  IterState st;
  st.confirmations = 10;
  const Tensor emb = MutualEmbeddings();
  const std::vector<EntityPair> seeds = {{0, 0}};
  for (int round = 1; round < 10; ++round) IterativePropose(st, emb, 3, seeds);
  // Swap the KG2 rows of 1 and 2 so (1, 1) and (2, 2) stop being mutual.
  Tensor broken = emb;
  for (int j = 0; j < 3; ++j) std::swap(broken.at(4, j), broken.at(5, j));
  EXPECT_TRUE(IterativePropose(st, broken, 3, seeds).empty());
  EXPECT_FALSE(st.candidates.count({1, 1}));
  for (int round = 1; round < 10; ++round) {
    const auto p = IterativePropose(st, emb, 3, seeds);
    EXPECT_EQ(std::count(p.begin(), p.end(), EntityPair{1, 1}), 0) << round;
  }
  const auto p = IterativePropose(st, emb, 3, seeds);
  EXPECT_EQ(std::count(p.begin(), p.end(), EntityPair{1, 1}), 1);
}

TEST(IterativePropose, AlignedEntitiesNeverProposed) {
  IterState st;
  st.confirmations = 1;
  const std::vector<EntityPair> seeds = {{0, 0}, {1, 2}};
  for (const auto& [a, b] : IterativePropose(st, MutualEmbeddings(), 3, seeds)) {
    EXPECT_NE(a, 0);
    EXPECT_NE(a, 1);
    EXPECT_NE(b, 0);
    EXPECT_NE(b, 2);
  }
}

ModalityFeatureTable Table(const Tensor& values) {
  ModalityFeatureTable t;
  t.modality = Modality::kVisual;
  t.values = values;
  t.mask.assign(values.dim(0), true);
  return t;
}

TEST(PseudoSeed, IdenticalTrueVectorsGiveTrueTopK) {
  Rng rng(6);
  const Tensor a = rng.NormalTensor({8, 5}, 1.0);
  const std::vector<int> perm = {3, 7, 0, 5, 1, 6, 2, 4};
  Tensor b({8, 5});
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 5; ++j) b.at(perm[i], j) = a.at(i, j);
  }
  const PseudoSeedDict d = BuildPseudoSeed(Table(a), Table(b), 5);
  ASSERT_EQ(d.pairs.size(), 5u);
  std::vector<EntityPair> truth;
  for (int i = 0; i < 8; ++i) truth.emplace_back(i, perm[i]);
  EXPECT_EQ(PseudoSeedPrecision(d, truth), 1.0);
}

TEST(PseudoSeed, ZeroCapacityIsEmptyAndOversizeIsClamped) {
  Rng rng(7);
  const Tensor a = rng.NormalTensor({4, 3}, 1.0), b = rng.NormalTensor({3, 3}, 1.0);
  EXPECT_TRUE(BuildPseudoSeed(Table(a), Table(b), 0).pairs.empty());
  const PseudoSeedDict d = BuildPseudoSeed(Table(a), Table(b), 10);
  EXPECT_EQ(d.capacity, 3);
  EXPECT_EQ(d.pairs.size(), 3u);
}

TEST(PseudoSeed, MatchesRepeatedArgmaxOracle) {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(40 + trial);
    const Tensor a = rng.NormalTensor({3, 4}, 1.0), b = rng.NormalTensor({3, 4}, 1.0);
    const Tensor sim = CosineSimilarity(a, Range(0, 3), b, Range(0, 3));
    std::vector<EntityPair> expect;
    std::set<int> used1, used2;
    for (int k = 0; k < 2; ++k) {
      EntityPair best{-1, -1};
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          if (used1.count(i) || used2.count(j)) continue;
          if (best.first < 0 || sim.at(i, j) > sim.at(best.first, best.second)) best = {i, j};
        }
      }
      expect.push_back(best);
      used1.insert(best.first);
      used2.insert(best.second);
    }
    const PseudoSeedDict d = BuildPseudoSeed(Table(a), Table(b), 2);
    std::vector<EntityPair> got;
    for (const auto& p : d.pairs) got.push_back(p.pair);
    EXPECT_EQ(got, expect);
  }
}

TEST(Schedule, WarmupPeakAndDecay) {
  const CosineWarmup s(5e-3, 1000);
  EXPECT_EQ(s.At(0), 0);
  EXPECT_EQ(s.warmup_steps(), 150);
  EXPECT_DOUBLE_EQ(s.At(150), 5e-3);
  double peak = 0;
  int64_t arg = 0;
  for (int64_t t = 0; t < 1000; ++t) {
    if (s.At(t) > peak) peak = s.At(t), arg = t;
  }
  EXPECT_EQ(arg, 150);
  EXPECT_LT(s.At(999), 1e-5 * 5e-3);
  for (int64_t t = 151; t < 1000; ++t) EXPECT_LE(s.At(t), s.At(t - 1));
}

TEST(AdamW, FirstStepMovesBySignedLearningRate) {
  ParameterStore p;
  p.Add("w", Tensor({2}, {1.0, -2.0}));
  AdamW opt;
  opt.Step(p, {{"w", Tensor({2}, {0.5, -3.0})}}, 0.01);
  // Bias-corrected first step: update = g / (|g| + eps), plus decay.
  EXPECT_NEAR(p.Get("w")[0], 1.0 - 0.01 * (0.5 / (0.5 + 1e-8) + 1e-4 * 1.0), 1e-12);
  EXPECT_NEAR(p.Get("w")[1], -2.0 - 0.01 * (-3.0 / (3.0 + 1e-8) + 1e-4 * -2.0), 1e-12);
}

struct SmallRun {
  SyntheticPair sp;
  TrainConfig cfg;
  PreparedData data;
  AlignmentSplit split;
};

SmallRun MakeRun(int entities, int epochs, TrainMode mode = TrainMode::kSupervised) {
  SmallRun r;
  GeneratorConfig g;
  g.entities = entities;
  g.visual_dim = 16;
  g.surface_dim = 8;
  g.visual_noise = 0.5;
  g.rewire_rate = 0.1;
  r.sp = GenerateSyntheticPair(g, 21);
  r.cfg.model.dim = 16;
  r.cfg.model.ffn_dim = 32;
  r.cfg.epochs = epochs;
  r.cfg.iterative_epochs = epochs;
  r.cfg.mode = mode;
  r.cfg.eval_every = 0;
  r.cfg.seed = 4;
  r.data = PrepareData(r.sp.data, r.cfg.model, {}, 2);
  r.split = SplitAlignments(r.sp.data.alignments, 0.3, 3);
  return r;
}

TEST(Train, SameSeedGivesBitIdenticalTrajectory) {
  SmallRun r = MakeRun(40, 6);
  r.cfg.loss.use_merp = true;
  const TrainResult a = Train(r.cfg, r.data, r.split);
  const TrainResult b = Train(r.cfg, r.data, r.split);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].loss, b.log[i].loss);
  EXPECT_TRUE(a.params == b.params);
}

TEST(Train, NoiselessFiftyEpochsLowersTheLoss) {
  SmallRun r;
  GeneratorConfig g;
  g.entities = 60;
  r.sp = GenerateSyntheticPair(g, 5);
  r.cfg.model.dim = 16;
  r.cfg.model.ffn_dim = 32;
  r.cfg.epochs = 50;
  r.cfg.eval_every = 0;
  r.data = PrepareData(r.sp.data, r.cfg.model, {}, 2);
  r.split = SplitAlignments(r.sp.data.alignments, 0.3, 3);
  const TrainResult res = Train(r.cfg, r.data, r.split);
  EXPECT_LT(res.log.back().loss, res.log.front().loss);
  EXPECT_TRUE(res.log.back().metrics.has_value());
}

TEST(Train, IterativeModeOnlyGrowsTheSeedSet) {
  SmallRun r = MakeRun(40, 10, TrainMode::kIterative);
  r.cfg.confirmations = 1;
  const TrainResult res = Train(r.cfg, r.data, r.split);
  ASSERT_EQ(res.log.size(), 20u);
  for (size_t i = 1; i < res.log.size(); ++i) {
    EXPECT_GE(res.log[i].seeds, res.log[i - 1].seeds);
  }
  EXPECT_GT(res.log.back().seeds, static_cast<int>(r.split.train.size()));
}

TEST(Train, UnsupervisedReportsDictionaryPrecision) {
  SmallRun r = MakeRun(40, 3, TrainMode::kUnsupervised);
  r.cfg.dictionary_size = 12;
  const TrainResult res = Train(r.cfg, r.data, r.split, r.sp.data.alignments);
  ASSERT_TRUE(res.pseudo_seed_precision.has_value());
  EXPECT_EQ(res.pseudo_seed_size, 12);
  EXPECT_EQ(res.seeds.size(), 12u);
}

TEST(Train, OverflowAbortsWithSnapshot) {
  SmallRun r = MakeRun(30, 3);
  for (auto& [m, x] : r.data.inputs.features) {
    for (Scalar& v : x.mutable_data()) v *= Scalar(1e300);
  }
  try {
    Train(r.cfg, r.data, r.split);
    FAIL() << "expected an abort";
  } catch (const TrainingAborted& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumerical);
    EXPECT_EQ(e.epoch(), 1);
    EXPECT_GT(e.snapshot().size(), 0);
  }
}

}  // namespace
}  // namespace mmalign
