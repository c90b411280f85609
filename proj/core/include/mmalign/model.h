#ifndef MMALIGN_MODEL_H_
#define MMALIGN_MODEL_H_

#include <cstdint>
#include <map>
#include <vector>

#include "mmalign/autodiff.h"
#include "mmalign/encoders.h"
#include "mmalign/kg.h"
#include "mmalign/mmh.h"
#include "mmalign/params.h"

namespace mmalign {

struct ModelConfig {
  int dim = 64;
  int ffn_dim = 400;
  int heads = 1;
  bool use_ffn = true;
  std::vector<Modality> modalities = {Modality::kGraph, Modality::kRelation,
                                      Modality::kAttribute, Modality::kVisual,
                                      Modality::kSurface};
  // Raw input width per non-graph modality.
  std::map<Modality, int> input_dims;

  int num_modalities() const { return static_cast<int>(modalities.size()); }
  bool Has(Modality m) const;
  // Position of `m` in the fusion order, or -1.
  int IndexOf(Modality m) const;
  void Validate() const;
};

// Everything the forward pass reads besides parameters. Rows of every matrix
// are the disjoint union of both graphs' entities: KG1 first, then KG2.
struct ModelInputs {
  int num_kg1 = 0;
  int num_kg2 = 0;
  Tensor mask;                          // adjacency attention mask
  std::map<Modality, Tensor> features;  // raw x^m for non-graph modalities

  int num_entities() const { return num_kg1 + num_kg2; }
};

struct ModelOutput {
  std::vector<Var> h;         // per modality, entities x d
  std::vector<Var> attended;  // per modality, after MHCA (and FFN)
  std::vector<std::vector<Var>> beta;  // [head][query modality]
  Var weights;                // entities x |M|
  Var early;                  // entities x |M| d
  Var late;
};

ParameterStore InitParameters(const ModelConfig& cfg, int num_entities,
                              uint64_t seed);

ModelOutput Forward(const ModelConfig& cfg, const BoundParameters& params,
                    Tape& tape, const ModelInputs& inputs);

// Parameter views used by Forward, exposed for tests.
GatParams BindGat(const BoundParameters& params);
LinearParams BindEncoder(const BoundParameters& params, Modality m);
MhcaParams BindMhca(const ModelConfig& cfg, const BoundParameters& params);
FfnParams BindFfn(const ModelConfig& cfg, const BoundParameters& params);

}  // namespace mmalign

#endif  // MMALIGN_MODEL_H_
