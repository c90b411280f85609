#include "mmalign/trainer.h"

#include <chrono>
#include <cmath>

#include "mmalign/encoders.h"
#include "mmalign/log.h"
#include "mmalign/random.h"
#include "mmalign/replay.h"

namespace mmalign {

const char* TrainModeName(TrainMode mode) {
  switch (mode) {
    case TrainMode::kSupervised: return "supervised";
    case TrainMode::kIterative: return "iterative";
    case TrainMode::kUnsupervised: return "unsupervised";
  }
  return "?";
}

TrainMode ParseTrainMode(const std::string& name) {
  if (name == "supervised") return TrainMode::kSupervised;
  if (name == "iterative") return TrainMode::kIterative;
  if (name == "unsupervised") return TrainMode::kUnsupervised;
  throw UsageError("unknown mode '" + name +
                   "' (supervised|iterative|unsupervised)");
}

namespace {

Tensor StackRows(const Tensor& top, const Tensor& bottom) {
  if (top.dim(1) != bottom.dim(1)) {
    throw ShapeError("stack rows", top.shape(), bottom.shape());
  }
  std::vector<Scalar> data(top.data().begin(), top.data().end());
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return Tensor({top.dim(0) + bottom.dim(0), top.dim(1)}, std::move(data));
}

bool HasDense(const Mmkg& kg, Modality m) {
  return m == Modality::kVisual ? !kg.visual.rows.empty()
                                : !kg.surface.rows.empty();
}

}  // namespace

PreparedData PrepareData(const PairDataset& data, ModelConfig& cfg,
                         const FeatureOptions& options, uint64_t seed) {
  PreparedData prepared;
  const Mmkg& kg1 = data.kg1;
  const Mmkg& kg2 = data.kg2;
  if (kg1.num_entities() == 0 || kg2.num_entities() == 0) {
    throw DataError("both graphs need at least one entity");
  }
  Rng rng(seed);

  // Dense tables for every dense modality present in the data, so that a
  // reference modality is available even when the model does not fuse it.
  for (Modality m : {Modality::kVisual, Modality::kSurface}) {
    if (!HasDense(kg1, m) && !HasDense(kg2, m)) {
      if (cfg.Has(m)) {
        LogWarning(std::string("no ") + ModalityTag(m) +
                   " features in either graph; modality dropped");
        std::erase(cfg.modalities, m);
      }
      continue;
    }
    const int dim = HasDense(kg1, m) ? (m == Modality::kVisual ? kg1.visual.dim
                                                               : kg1.surface.dim)
                                     : (m == Modality::kVisual ? kg2.visual.dim
                                                               : kg2.surface.dim);
    ModalityFeatureTable t1 = DenseFeatureTable(kg1, m, dim);
    ModalityFeatureTable t2 = DenseFeatureTable(kg2, m, dim);
    if (m == Modality::kVisual && !options.uninformative_visual.empty()) {
      std::map<int, int> counterpart(data.alignments.begin(),
                                     data.alignments.end());
      std::vector<int> right;
      for (int e : options.uninformative_visual) {
        auto it = counterpart.find(e);
        if (it != counterpart.end()) right.push_back(it->second);
      }
      t1 = ReplaceWithMean(t1, options.uninformative_visual);
      t2 = ReplaceWithMean(t2, right);
    }
    const uint64_t salt = static_cast<uint64_t>(m) * 2;
    prepared.kg1[m] = ImputeMissing(t1, rng.Fork(salt).seed());
    prepared.kg2[m] = ImputeMissing(t2, rng.Fork(salt + 1).seed());
  }

  for (Modality m : {Modality::kRelation, Modality::kAttribute}) {
    if (!cfg.Has(m)) continue;
    const int cap = m == Modality::kRelation ? options.relation_vocab
                                             : options.attribute_vocab;
    std::vector<std::string> vocab = BuildVocab({&kg1, &kg2}, m, cap);
    if (vocab.empty()) {
      LogWarning(std::string("no ") + ModalityTag(m) +
                 " types in either graph; modality dropped");
      std::erase(cfg.modalities, m);
      continue;
    }
    prepared.kg1[m] = BuildBowFeatures(kg1, m, vocab);
    prepared.kg2[m] = BuildBowFeatures(kg2, m, vocab);
    (m == Modality::kRelation ? prepared.relation_vocab
                              : prepared.attribute_vocab) = std::move(vocab);
  }

  ModelInputs& inputs = prepared.inputs;
  inputs.num_kg1 = kg1.num_entities();
  inputs.num_kg2 = kg2.num_entities();
  for (Modality m : cfg.modalities) {
    if (m == Modality::kGraph) continue;
    inputs.features[m] =
        StackRows(prepared.kg1.at(m).values, prepared.kg2.at(m).values);
    cfg.input_dims[m] = prepared.kg1.at(m).dim();
  }
  if (cfg.Has(Modality::kGraph)) {
    inputs.mask = Adjacency::FromGraphs({&kg1, &kg2}).AttentionMask();
  }
  cfg.Validate();
  return prepared;
}

void TrainConfig::Validate() const {
  model.Validate();
  loss.Validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("train: " + what);
  };
  require(epochs >= 1, "epochs must be >= 1");
  require(mode != TrainMode::kIterative || iterative_epochs >= 1,
          "iterative mode needs iterative epochs >= 1");
  require(batch_size >= 1, "batch size must be >= 1");
  require(learning_rate > 0, "learning rate must be > 0");
  require(propose_every >= 1 && confirmations >= 1,
          "K_e and K_s must be >= 1");
  require(reference == Modality::kVisual || reference == Modality::kSurface,
          "reference modality must be v or s");
  require(mode != TrainMode::kUnsupervised || dictionary_size >= 1,
          "unsupervised mode needs a dictionary size >= 1");
  require(eval_every >= 0, "eval_every must be >= 0");
  require(!hits_at.empty(), "need at least one Hits@N cutoff");
}

Inference Infer(const ModelConfig& cfg, const ParameterStore& params,
                const ModelInputs& inputs) {
  Tape tape;
  BoundParameters bound(tape, params, /*requires_grad=*/false);
  ModelOutput out = Forward(cfg, bound, tape, inputs);
  return {out.early.value(), out.weights.value()};
}

namespace {

std::vector<int> Counterparts(const std::vector<EntityPair>& seeds,
                              int num_kg1, int num_entities) {
  std::vector<int> counterpart(num_entities, -1);
  for (const auto& [a, b] : seeds) {
    counterpart[a] = num_kg1 + b;
    counterpart[num_kg1 + b] = a;
  }
  return counterpart;
}

}  // namespace

TrainResult Train(const TrainConfig& cfg, const PreparedData& data,
                  const AlignmentSplit& split,
                  const std::vector<EntityPair>& truth,
                  const EpochCallback& on_epoch) {
  using Clock = std::chrono::steady_clock;
  cfg.Validate();
  const ModelInputs& inputs = data.inputs;
  const int n1 = inputs.num_kg1;
  const int n = inputs.num_entities();
  if (split.test.empty()) throw DataError("train: empty test split");

  Rng root(cfg.seed);
  TrainResult result;
  result.params = InitParameters(cfg.model, n, root.Fork(1).seed());
  Rng order_rng = root.Fork(2);
  AdamW optimizer(cfg.adamw);

  std::vector<EntityPair>& seeds = result.seeds;
  if (cfg.mode == TrainMode::kUnsupervised) {
    auto t1 = data.kg1.find(cfg.reference);
    auto t2 = data.kg2.find(cfg.reference);
    if (t1 == data.kg1.end() || t2 == data.kg2.end()) {
      throw DataError(std::string("unsupervised mode: no ") +
                      ModalityTag(cfg.reference) + " features");
    }
    PseudoSeedDict dict =
        BuildPseudoSeed(t1->second, t2->second, cfg.dictionary_size);
    for (const ScoredPair& p : dict.pairs) seeds.push_back(p.pair);
    result.pseudo_seed_size = static_cast<int>(dict.pairs.size());
    if (!truth.empty()) result.pseudo_seed_precision = PseudoSeedPrecision(dict, truth);
  } else {
    seeds = split.train;
  }
  if (seeds.empty()) throw DataError("train: no training pairs");

  bool use_merp = cfg.loss.use_merp;
  if (use_merp && cfg.mode != TrainMode::kSupervised) {
    LogWarning("hard-negative replay is only used in supervised mode; off");
    use_merp = false;
  }

  const int phases = cfg.mode == TrainMode::kIterative ? 2 : 1;
  int epoch_counter = 0;
  for (int phase = 1; phase <= phases; ++phase) {
    const int num_epochs = phase == 1 ? cfg.epochs : cfg.iterative_epochs;
    const int64_t steps_per_epoch =
        (static_cast<int64_t>(seeds.size()) + cfg.batch_size - 1) /
        cfg.batch_size;
    const CosineWarmup schedule(cfg.learning_rate, num_epochs * steps_per_epoch,
                                cfg.warmup_fraction);
    int64_t step = 0;
    IterState probation;
    probation.propose_every = cfg.propose_every;
    probation.confirmations = cfg.confirmations;

    for (int e = 0; e < num_epochs; ++e) {
      const auto start = Clock::now();
      EpochRecord rec;
      rec.phase = phase;
      rec.epoch = ++epoch_counter;
      try {
        std::vector<EntityPair> order = seeds;
        order_rng.Shuffle(order);
        const std::vector<int> counterpart = Counterparts(seeds, n1, n);
        MerpState merp;
        if (use_merp && !cfg.merp_per_step) {
          merp = RefreshMerp(Infer(cfg.model, result.params, inputs).early, n1,
                             counterpart);
        }
        int batches = 0;
        for (size_t begin = 0; begin < order.size();
             begin += cfg.batch_size) {
          const size_t end = std::min(order.size(), begin + cfg.batch_size);
          Batch batch;
          for (size_t i = begin; i < end; ++i) {
            batch.emplace_back(order[i].first, n1 + order[i].second);
          }
          Tape tape;
          BoundParameters bound(tape, result.params);
          ModelOutput out = Forward(cfg.model, bound, tape, inputs);
          NegativeSets expanded;
          if (use_merp) {
            // Embeddings from this forward pass equal those right after the
            // previous update, so this is the per-step refresh.
            if (cfg.merp_per_step) {
              merp = RefreshMerp(out.early.value(), n1, counterpart);
            }
            expanded = ExpandNegatives(batch, InBatchNegatives(batch), merp);
          }
          LossBreakdown loss =
              TotalLoss(out, batch, cfg.loss, use_merp ? &expanded : nullptr);
          const Gradients grads = tape.Backward(loss.total);
          std::map<std::string, Tensor> by_name;
          for (const auto& [name, var] : bound.vars()) by_name[name] = grads[var];
          const double lr = schedule.At(step++);
          optimizer.Step(result.params, by_name, lr);

          rec.loss += loss.total.value().item();
          rec.fused += loss.fused;
          rec.intra += loss.intra;
          rec.late_intra += loss.late_intra;
          rec.late += loss.late;
          rec.clamped += loss.clamped;
          rec.learning_rate = lr;
          ++batches;
        }
        rec.loss /= batches;
        rec.fused /= batches;
        rec.intra /= batches;
        rec.late_intra /= batches;
        rec.late /= batches;

        if (phase == 2 && (e + 1) % cfg.propose_every == 0) {
          const Tensor early = Infer(cfg.model, result.params, inputs).early;
          for (const EntityPair& p :
               IterativePropose(probation, early, n1, seeds)) {
            seeds.push_back(p);
            ++rec.promoted;
          }
        }
        const bool last = phase == phases && e + 1 == num_epochs;
        if (last || (cfg.eval_every > 0 && (e + 1) % cfg.eval_every == 0)) {
          const Tensor early = Infer(cfg.model, result.params, inputs).early;
          rec.metrics = Evaluate(early, n1, split.test, cfg.hits_at, cfg.pool);
        }
      } catch (const TrainingAborted&) {
        throw;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kNumerical) throw;
        throw TrainingAborted("numerical abort at epoch " +
                                  std::to_string(rec.epoch) + ": " + err.what(),
                              result.params, rec.epoch);
      }
      rec.seeds = static_cast<int>(seeds.size());
      rec.wall_seconds =
          std::chrono::duration<double>(Clock::now() - start).count();
      if (!std::isfinite(rec.loss)) {
        throw TrainingAborted("non-finite loss at epoch " +
                                  std::to_string(rec.epoch),
                              result.params, rec.epoch);
      }
      result.log.push_back(rec);
      if (on_epoch) on_epoch(rec);
    }
  }
  result.final_report = *result.log.back().metrics;
  return result;
}

}  // namespace mmalign
