#include "mmalign/loss.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mmalign/ops.h"

namespace mmalign {

using namespace ops;

void LossConfig::Validate() const {
  if (!(temperature > 0)) {
    throw UsageError("temperature must be > 0, got " +
                     std::to_string(temperature));
  }
}

Scalar AlignmentProbability(
    std::span<const Scalar> anchor, std::span<const Scalar> positive,
    const std::vector<std::span<const Scalar>>& negatives, Scalar temperature) {
  if (!(temperature > 0)) throw UsageError("temperature must be > 0");
  auto logit = [&](std::span<const Scalar> other) {
    if (other.size() != anchor.size()) {
      throw Error(ErrorKind::kShape, "alignment_probability: length " +
                                         std::to_string(other.size()) +
                                         " vs " +
                                         std::to_string(anchor.size()));
    }
    Scalar dot = 0;
    for (size_t k = 0; k < anchor.size(); ++k) dot += anchor[k] * other[k];
    return dot / temperature;
  };
  const Scalar pos = logit(positive);
  // p = 1 / (1 + sum exp(neg - pos)), evaluated stably.
  Scalar rest = 0;
  for (const auto& n : negatives) rest += std::exp(logit(n) - pos);
  return Scalar(1) / (Scalar(1) + rest);
}

NegativeSets InBatchNegatives(const Batch& batch) {
  std::vector<int> rows;
  for (const auto& [a, b] : batch) {
    rows.push_back(a);
    rows.push_back(b);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  NegativeSets sets;
  for (const auto& [a, b] : batch) {
    std::vector<int> negs;
    for (int r : rows) {
      if (r != a && r != b) negs.push_back(r);
    }
    sets.forward.push_back(negs);
    sets.backward.push_back(std::move(negs));
  }
  return sets;
}

namespace {

// Log-probabilities (B x 1) of the positives for one direction.
Var DirectionLogProb(Var sim, const std::vector<int>& anchor_cols,
                     const std::vector<int>& positive_cols,
                     const std::vector<std::vector<int>>& negative_cols,
                     int width, Tape* tape) {
  const int b = static_cast<int>(anchor_cols.size());
  Tensor onehot({b, width});
  Tensor mask = Tensor::Full({b, width}, kMaskedLogit);
  for (int i = 0; i < b; ++i) {
    onehot.at(i, positive_cols[i]) = 1;
    for (int c : negative_cols[i]) mask.at(i, c) = 0;
  }
  Var rows = GatherRows(sim, anchor_cols);
  Var pos = SumLastAxis(Mul(rows, tape->Constant(std::move(onehot))));
  Var logits = Concat({pos, Add(rows, tape->Constant(std::move(mask)))});
  return Slice(LogSoftmax(logits), 0, 1);
}

}  // namespace

ContrastiveResult ContrastiveLoss(Var embeddings, const Batch& batch,
                                  const NegativeSets& negatives,
                                  Scalar temperature, bool normalize) {
  if (!(temperature > 0)) throw UsageError("temperature must be > 0");
  if (batch.empty()) throw UsageError("contrastive loss: empty batch");
  if (negatives.forward.size() != batch.size() ||
      negatives.backward.size() != batch.size()) {
    throw UsageError("contrastive loss: negative sets do not match the batch");
  }
  Tape* tape = embeddings.tape();

  // Every row touched by the batch, in ascending order.
  std::vector<int> rows;
  for (size_t i = 0; i < batch.size(); ++i) {
    rows.push_back(batch[i].first);
    rows.push_back(batch[i].second);
    rows.insert(rows.end(), negatives.forward[i].begin(),
                negatives.forward[i].end());
    rows.insert(rows.end(), negatives.backward[i].begin(),
                negatives.backward[i].end());
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::unordered_map<int, int> col;
  for (int c = 0; c < static_cast<int>(rows.size()); ++c) col[rows[c]] = c;
  auto cols_of = [&](const std::vector<int>& v, int skip_a, int skip_b) {
    std::vector<int> out;
    for (int r : v) {
      if (r == skip_a || r == skip_b) {
        throw UsageError("contrastive loss: negative set contains its anchor "
                         "or positive");
      }
      out.push_back(col.at(r));
    }
    return out;
  };

  Var e = GatherRows(embeddings, rows);
  if (normalize) e = L2Normalize(e);
  Var sim = Scale(MatMul(e, Transpose(e)), Scalar(1) / temperature);

  const int width = static_cast<int>(rows.size());
  std::vector<int> left, right;
  std::vector<std::vector<int>> neg_fwd, neg_bwd;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto [a, b] = batch[i];
    left.push_back(col.at(a));
    right.push_back(col.at(b));
    neg_fwd.push_back(cols_of(negatives.forward[i], a, b));
    neg_bwd.push_back(cols_of(negatives.backward[i], a, b));
  }
  Var fwd = DirectionLogProb(sim, left, right, neg_fwd, width, tape);
  Var bwd = DirectionLogProb(sim, right, left, neg_bwd, width, tape);

  ContrastiveResult result;
  const Scalar floor = std::log(kMinProbability);
  for (const Var* v : {&fwd, &bwd}) {
    for (Scalar lp : v->value().data()) result.clamped += lp < floor;
  }
  if (result.clamped > 0) {
    fwd = ClampMin(fwd, floor);
    bwd = ClampMin(bwd, floor);
  }
  const Scalar scale = Scalar(-0.5) / static_cast<Scalar>(batch.size());
  result.loss = Scale(Add(Sum(fwd), Sum(bwd)), scale);
  return result;
}

LossBreakdown TotalLoss(const ModelOutput& out, const Batch& batch,
                        const LossConfig& cfg,
                        const NegativeSets* fused_negatives) {
  cfg.Validate();
  const NegativeSets in_batch = InBatchNegatives(batch);
  const Scalar tau = cfg.temperature;
  LossBreakdown result;
  std::vector<Var> terms;

  auto add = [&](Var emb, const NegativeSets& negs, Scalar& slot) {
    ContrastiveResult r = ContrastiveLoss(emb, batch, negs, tau, cfg.normalize);
    slot += r.loss.value().item();
    result.clamped += r.clamped;
    terms.push_back(r.loss);
  };

  add(out.early, fused_negatives ? *fused_negatives : in_batch, result.fused);
  for (const Var& h : out.h) add(h, in_batch, result.intra);
  if (cfg.use_licl) {
    for (const Var& a : out.attended) add(a, in_batch, result.late_intra);
  }
  if (cfg.use_late) add(out.late, in_batch, result.late);

  Var total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) total = Add(total, terms[i]);
  result.total = total;
  return result;
}

}  // namespace mmalign
