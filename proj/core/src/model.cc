#include "mmalign/model.h"

#include <algorithm>
#include <cmath>

#include "mmalign/ops.h"
#include "mmalign/random.h"

namespace mmalign {

bool ModelConfig::Has(Modality m) const { return IndexOf(m) >= 0; }

int ModelConfig::IndexOf(Modality m) const {
  auto it = std::find(modalities.begin(), modalities.end(), m);
  return it == modalities.end() ? -1 : static_cast<int>(it - modalities.begin());
}

void ModelConfig::Validate() const {
  if (dim < 2) throw UsageError("model: dim must be >= 2");
  if (heads < 1 || dim % heads != 0) {
    throw UsageError("model: dim " + std::to_string(dim) +
                     " not divisible by head count " + std::to_string(heads));
  }
  if (Has(Modality::kGraph) && dim % 2 != 0) {
    throw UsageError("model: dim must be even for the two-head graph encoder");
  }
  if (use_ffn && ffn_dim < 1) throw UsageError("model: ffn_dim must be >= 1");
  if (modalities.empty()) throw UsageError("model: no modalities");
  if (!std::is_sorted(modalities.begin(), modalities.end())) {
    throw UsageError("model: modalities must be in canonical order");
  }
  for (Modality m : modalities) {
    if (m == Modality::kGraph) continue;
    auto it = input_dims.find(m);
    if (it == input_dims.end() || it->second < 1) {
      throw UsageError(std::string("model: no input width for modality ") +
                       ModalityTag(m));
    }
  }
}

namespace {

Tensor Xavier(Rng& rng, int fan_in, int fan_out) {
  return rng.NormalTensor({fan_in, fan_out},
                          std::sqrt(2.0 / (fan_in + fan_out)));
}

std::string EncoderName(Modality m, const char* part) {
  return std::string("enc.") + ModalityTag(m) + "." + part;
}

std::string GatName(int layer, int head, const char* part) {
  return "gat.l" + std::to_string(layer) + ".h" + std::to_string(head) + "." +
         part;
}

}  // namespace

ParameterStore InitParameters(const ModelConfig& cfg, int num_entities,
                              uint64_t seed) {
  cfg.Validate();
  Rng rng(seed);
  const int d = cfg.dim;
  ParameterStore store;
  if (cfg.Has(Modality::kGraph)) {
    store.Add("gat.entity",
              rng.NormalTensor({num_entities, d}, 1.0 / std::sqrt(d)));
    store.Add("gat.diag", Tensor::Full({d}, 1));
    for (int layer = 0; layer < 2; ++layer) {
      const int out = layer == 0 ? d / 2 : d;
      for (int head = 0; head < 2; ++head) {
        store.Add(GatName(layer, head, "w"), Xavier(rng, d, out));
        store.Add(GatName(layer, head, "a_src"), Xavier(rng, out, 1));
        store.Add(GatName(layer, head, "a_dst"), Xavier(rng, out, 1));
      }
    }
  }
  for (Modality m : cfg.modalities) {
    if (m == Modality::kGraph) continue;
    store.Add(EncoderName(m, "w"), Xavier(rng, cfg.input_dims.at(m), d));
    store.Add(EncoderName(m, "b"), Tensor::Zeros({1, d}));
  }
  const int d_head = d / cfg.heads;
  for (int i = 0; i < cfg.heads; ++i) {
    store.Add("mhca.q" + std::to_string(i), Xavier(rng, d, d_head));
    store.Add("mhca.k" + std::to_string(i), Xavier(rng, d, d_head));
    store.Add("mhca.v" + std::to_string(i), Xavier(rng, d, d_head));
  }
  store.Add("mhca.o", Xavier(rng, d, d));
  store.Add("mhca.ln.g", Tensor::Full({d}, 1));
  store.Add("mhca.ln.b", Tensor::Zeros({d}));
  if (cfg.use_ffn) {
    store.Add("ffn.w1", Xavier(rng, d, cfg.ffn_dim));
    store.Add("ffn.b1", Tensor::Zeros({1, cfg.ffn_dim}));
    store.Add("ffn.w2", Xavier(rng, cfg.ffn_dim, d));
    store.Add("ffn.b2", Tensor::Zeros({1, d}));
    store.Add("ffn.ln.g", Tensor::Full({d}, 1));
    store.Add("ffn.ln.b", Tensor::Zeros({d}));
  }
  return store;
}

GatParams BindGat(const BoundParameters& params) {
  GatParams gat;
  gat.diag = params["gat.diag"];
  for (int layer = 0; layer < 2; ++layer) {
    for (int head = 0; head < 2; ++head) {
      gat.layers[layer][head] = {params[GatName(layer, head, "w")],
                                 params[GatName(layer, head, "a_src")],
                                 params[GatName(layer, head, "a_dst")]};
    }
  }
  return gat;
}

LinearParams BindEncoder(const BoundParameters& params, Modality m) {
  return {params[EncoderName(m, "w")], params[EncoderName(m, "b")]};
}

MhcaParams BindMhca(const ModelConfig& cfg, const BoundParameters& params) {
  MhcaParams mhca;
  for (int i = 0; i < cfg.heads; ++i) {
    mhca.query.push_back(params["mhca.q" + std::to_string(i)]);
    mhca.key.push_back(params["mhca.k" + std::to_string(i)]);
    mhca.value.push_back(params["mhca.v" + std::to_string(i)]);
  }
  mhca.output = params["mhca.o"];
  mhca.ln_gain = params["mhca.ln.g"];
  mhca.ln_bias = params["mhca.ln.b"];
  return mhca;
}

FfnParams BindFfn(const ModelConfig& cfg, const BoundParameters& params) {
  FfnParams ffn;
  ffn.enabled = cfg.use_ffn;
  if (!cfg.use_ffn) return ffn;
  ffn.w1 = params["ffn.w1"];
  ffn.b1 = params["ffn.b1"];
  ffn.w2 = params["ffn.w2"];
  ffn.b2 = params["ffn.b2"];
  ffn.ln_gain = params["ffn.ln.g"];
  ffn.ln_bias = params["ffn.ln.b"];
  return ffn;
}

ModelOutput Forward(const ModelConfig& cfg, const BoundParameters& params,
                    Tape& tape, const ModelInputs& inputs) {
  ModelOutput out;
  for (Modality m : cfg.modalities) {
    if (m == Modality::kGraph) {
      Var mask = tape.Constant(inputs.mask);
      out.h.push_back(GatForward(BindGat(params), mask, params["gat.entity"]));
    } else {
      auto it = inputs.features.find(m);
      if (it == inputs.features.end()) {
        throw UsageError(std::string("forward: missing input features for ") +
                         ModalityTag(m));
      }
      out.h.push_back(
          ModalityEncode(BindEncoder(params, m), tape.Constant(it->second)));
    }
  }
  MhcaResult mhca = MhcaForward(BindMhca(cfg, params), out.h);
  out.beta = std::move(mhca.beta);
  out.attended = std::move(mhca.attended);
  if (cfg.use_ffn) {
    const FfnParams ffn = BindFfn(cfg, params);
    for (Var& a : out.attended) a = FfnForward(ffn, a);
  }
  out.weights = MetaWeights(out.beta);
  Fusion fused = Fuse(out.weights, out.h, out.attended);
  out.early = fused.early;
  out.late = fused.late;
  return out;
}

}  // namespace mmalign
