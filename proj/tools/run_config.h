#ifndef MMALIGN_TOOLS_RUN_CONFIG_H_
#define MMALIGN_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mmalign/synthetic.h"
#include "mmalign/trainer.h"

namespace mmalign::cli {

// Everything a training or evaluation run depends on. Serialized verbatim
// into the run directory.
struct RunConfig {
  std::string profile = "desk";
  std::string data;  // pair directory

  // Model.
  int dim = 64;
  int ffn_dim = 400;
  int heads = 1;
  bool ffn = true;
  std::string modalities = "gravs";
  int relation_vocab = 1000;
  int attribute_vocab = 1000;

  // Objective.
  double temperature = 0.1;
  bool licl = true;
  bool late = false;
  bool merp = false;

  // Schedule.
  std::string mode = "supervised";
  int epochs = 300;
  int iterative_epochs = 300;
  int batch_size = 3500;
  double learning_rate = 5e-3;
  double warmup_fraction = 0.15;
  double weight_decay = 1e-4;
  int propose_every = 5;
  int confirmations = 10;
  std::string reference = "v";
  int dictionary_size = 0;  // 0: 0.3 x |KG1|
  double seed_ratio = 0.3;
  int eval_every = 10;
  std::string pool = "test";  // test | all
  uint64_t seed = 0;

  void Validate() const;
  TrainConfig ToTrainConfig() const;
  FeatureOptions ToFeatureOptions() const;
};

// Defaults for a named profile: desk, paper-dbp or paper-fbdb.
RunConfig ProfileDefaults(const std::string& profile);

nlohmann::json ToJson(const RunConfig& cfg);
// Starts from the profile named in `doc` (or `base`'s) and applies every key.
// Unknown keys are a usage error.
RunConfig FromJson(const nlohmann::json& doc, const RunConfig& base);

nlohmann::json ToJson(const GeneratorConfig& cfg);
GeneratorConfig GeneratorFromJson(const nlohmann::json& doc,
                                  const GeneratorConfig& base);

nlohmann::json ReadJsonFile(const std::filesystem::path& file);
void WriteTextFile(const std::filesystem::path& file, const std::string& text);

// Seed used when no flag or config sets one: MMALIGN_SEED, else 0.
uint64_t DefaultSeed();

}  // namespace mmalign::cli

#endif  // MMALIGN_TOOLS_RUN_CONFIG_H_
