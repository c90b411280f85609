#ifndef MMALIGN_TRAINER_H_
#define MMALIGN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmalign/eval.h"
#include "mmalign/features.h"
#include "mmalign/loss.h"
#include "mmalign/model.h"
#include "mmalign/optim.h"
#include "mmalign/self_training.h"

namespace mmalign {

enum class TrainMode { kSupervised, kIterative, kUnsupervised };

const char* TrainModeName(TrainMode mode);
TrainMode ParseTrainMode(const std::string& name);

struct FeatureOptions {
  int relation_vocab = 1000;   // d_r cap
  int attribute_vocab = 1000;  // d_a cap
  // Entities (KG1 indices, applied to both sides of their true pair)
  // whose visual row is replaced by the population mean.
  std::vector<int> uninformative_visual;
};

// Model inputs plus the raw tables they were built from.
struct PreparedData {
  ModelInputs inputs;
  std::map<Modality, ModalityFeatureTable> kg1;
  std::map<Modality, ModalityFeatureTable> kg2;
  std::vector<std::string> relation_vocab;
  std::vector<std::string> attribute_vocab;
};

// Builds bag-of-words tables, dense tables (imputing missing rows under
// `seed`) and the adjacency mask for the modalities of `cfg`, and records
// the resulting input widths in cfg.input_dims.
PreparedData PrepareData(const PairDataset& data, ModelConfig& cfg,
                         const FeatureOptions& options, uint64_t seed);

struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  AdamWConfig adamw;
  TrainMode mode = TrainMode::kSupervised;
  int epochs = 300;
  int iterative_epochs = 300;  // second phase, iterative mode only
  int batch_size = 3500;
  double learning_rate = 5e-3;
  double warmup_fraction = 0.15;
  bool merp_per_step = true;  // false: refresh once per epoch
  int propose_every = 5;      // K_e
  int confirmations = 10;     // K_s
  Modality reference = Modality::kVisual;  // unsupervised mode
  int dictionary_size = 0;                 // N_dic
  int eval_every = 1;  // 0: evaluate only after the last epoch
  std::vector<int> hits_at = {1, 10};
  CandidatePool pool = CandidatePool::kTestTargets;
  uint64_t seed = 0;

  void Validate() const;
};

struct EpochRecord {
  int phase = 1;
  int epoch = 0;  // 1-based, counted across phases
  double loss = 0;
  double fused = 0;
  double intra = 0;
  double late_intra = 0;
  double late = 0;
  double learning_rate = 0;
  int seeds = 0;  // |S| after the epoch
  int promoted = 0;
  int clamped = 0;
  std::optional<MetricsReport> metrics;
  double wall_seconds = 0;
};

struct TrainResult {
  ParameterStore params;
  std::vector<EpochRecord> log;
  MetricsReport final_report;
  std::vector<EntityPair> seeds;  // final training pairs
  std::optional<double> pseudo_seed_precision;
  int pseudo_seed_size = 0;
};

// Raised when training produces a non-finite value. Holds the parameters
// as they were before the failing step.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& message, ParameterStore snapshot,
                  int epoch)
      : Error(ErrorKind::kNumerical, message),
        snapshot_(std::move(snapshot)),
        epoch_(epoch) {}

  const ParameterStore& snapshot() const { return snapshot_; }
  int epoch() const { return epoch_; }

 private:
  ParameterStore snapshot_;
  int epoch_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs the full loop: forward, loss, backward and AdamW under the warm-up
// schedule; probation rounds in the iterative phase; a pseudo-seed
// dictionary in place of the training pairs in unsupervised mode.
// `truth` (all reference pairs) is only used to score the dictionary.
TrainResult Train(const TrainConfig& cfg, const PreparedData& data,
                  const AlignmentSplit& split,
                  const std::vector<EntityPair>& truth = {},
                  const EpochCallback& on_epoch = nullptr);

struct Inference {
  Tensor early;    // fused embeddings, union rows
  Tensor weights;  // meta weights, union rows x |M|
};

Inference Infer(const ModelConfig& cfg, const ParameterStore& params,
                const ModelInputs& inputs);

}  // namespace mmalign

#endif  // MMALIGN_TRAINER_H_
